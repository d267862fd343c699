#pragma once

#include "infrasim/network.hpp"

#include <map>
#include <string>
#include <vector>

namespace infrasim
{
    /// Plain graph for centrality: nodes by index, edges keyed by id.
    struct Graph
    {
        struct Edge
        {
            std::string id;
            std::size_t a = 0;
            std::size_t b = 0;
        };

        std::vector<std::string> nodes;
        std::vector<Edge> edges;
        bool directed = false;
    };

    /// The topology of one infrastructure network. Water: pipes and pumps
    /// between water nodes. Power: lines, transformers and switches between
    /// buses. Traffic: directed road links between zone nodes. Component
    /// statuses are ignored (the pre-disaster graph).
    Graph network_graph(IntegratedNetwork const& net, NetworkKind k);

    /// Unweighted shortest-path edge betweenness (Brandes accumulation).
    /// Undirected graphs count each unordered node pair once; directed graphs
    /// count ordered pairs. Parallel edges split paths between them.
    std::map<std::string, double> edge_betweenness(Graph const& g);
}
