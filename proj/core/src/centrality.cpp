#include "infrasim/centrality.hpp"

#include <deque>

namespace infrasim
{
    Graph
    network_graph(IntegratedNetwork const& net, NetworkKind k)
    {
        Graph g;
        g.directed = k == NetworkKind::traffic;
        std::map<std::string, std::size_t> index;
        for (auto const& c : net.components(k))
        {
            if (!is_edge_kind(c.kind) && !is_bus_attached_kind(c.kind))
            {
                index[c.id] = g.nodes.size();
                g.nodes.push_back(c.id);
            }
        }
        for (auto const& c : net.components(k))
        {
            if (!is_edge_kind(c.kind))
            {
                continue;
            }
            auto a = index.find(c.from);
            auto b = index.find(c.to);
            if (a != index.end() && b != index.end())
            {
                g.edges.push_back({c.id, a->second, b->second});
            }
        }
        return g;
    }

    std::map<std::string, double>
    edge_betweenness(Graph const& g)
    {
        std::size_t const n = g.nodes.size();
        // adjacency: (neighbour, edge index)
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
        for (std::size_t e = 0; e < g.edges.size(); ++e)
        {
            auto const& ed = g.edges[e];
            adj[ed.a].push_back({ed.b, e});
            if (!g.directed)
            {
                adj[ed.b].push_back({ed.a, e});
            }
        }

        std::vector<double> score(g.edges.size(), 0.0);
        std::vector<double> sigma(n);
        std::vector<long> dist(n);
        std::vector<double> delta(n);
        std::vector<std::vector<std::pair<std::size_t, std::size_t>>> preds(n);
        std::vector<std::size_t> order;
        for (std::size_t s = 0; s < n; ++s)
        {
            std::fill(sigma.begin(), sigma.end(), 0.0);
            std::fill(dist.begin(), dist.end(), -1L);
            std::fill(delta.begin(), delta.end(), 0.0);
            for (auto& p : preds)
            {
                p.clear();
            }
            order.clear();
            sigma[s] = 1.0;
            dist[s] = 0;
            std::deque<std::size_t> queue{s};
            while (!queue.empty())
            {
                std::size_t const v = queue.front();
                queue.pop_front();
                order.push_back(v);
                for (auto [w, e] : adj[v])
                {
                    if (w == v)
                    {
                        continue;
                    }
                    if (dist[w] < 0)
                    {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if (dist[w] == dist[v] + 1)
                    {
                        sigma[w] += sigma[v];
                        preds[w].push_back({v, e});
                    }
                }
            }
            for (auto it = order.rbegin(); it != order.rend(); ++it)
            {
                std::size_t const w = *it;
                for (auto [v, e] : preds[w])
                {
                    double const c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    score[e] += c;
                    delta[v] += c;
                }
            }
        }

        std::map<std::string, double> out;
        for (std::size_t e = 0; e < g.edges.size(); ++e)
        {
            out[g.edges[e].id] = g.directed ? score[e] : 0.5 * score[e];
        }
        return out;
    }
}
