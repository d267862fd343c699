#include "infrasim/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace infrasim
{
    std::optional<double>
    ecs(std::vector<double> const& supply, std::vector<double> const& demand)
    {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < demand.size(); ++i)
        {
            if (demand[i] > 0.0)
            {
                sum += std::clamp(supply[i] / demand[i], 0.0, 1.0);
                ++n;
            }
        }
        if (n == 0)
        {
            return std::nullopt;
        }
        return sum / static_cast<double>(n);
    }

    std::optional<double>
    pcs(std::vector<double> const& supply, std::vector<double> const& demand)
    {
        double served = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < demand.size(); ++i)
        {
            if (demand[i] > 0.0)
            {
                served += std::clamp(supply[i], 0.0, demand[i]);
                total += demand[i];
            }
        }
        if (!(total > 0.0))
        {
            return std::nullopt;
        }
        return served / total;
    }

    std::vector<std::optional<double>>
    mop_curve(NetworkSeries const& series, Mop mop)
    {
        std::vector<std::optional<double>> out;
        out.reserve(series.size());
        for (std::size_t k = 0; k < series.size(); ++k)
        {
            out.push_back(
                mop == Mop::ecs ? ecs(series.supply[k], series.demand[k])
                                : pcs(series.supply[k], series.demand[k]));
        }
        return out;
    }

    double
    system_eoh(
        std::vector<double> const& time,
        std::vector<std::optional<double>> const& curve,
        double t0,
        double T)
    {
        if (!(T > t0))
        {
            throw std::invalid_argument("EOH needs T > t0");
        }
        if (time.size() != curve.size())
        {
            throw std::invalid_argument("EOH: time and curve lengths differ");
        }
        double area = 0.0;
        for (std::size_t i = 0; i + 1 < time.size(); ++i)
        {
            double const a = time[i];
            double const b = time[i + 1];
            if (b < a)
            {
                throw std::invalid_argument("EOH: sample times must not decrease");
            }
            if (!curve[i] || !curve[i + 1] || b == a)
            {
                continue;
            }
            double const lo = std::max(a, t0);
            double const hi = std::min(b, T);
            if (!(hi > lo))
            {
                continue;
            }
            double const la = 1.0 - *curve[i];
            double const lb = 1.0 - *curve[i + 1];
            auto loss = [&](double t) { return la + (lb - la) * (t - a) / (b - a); };
            area += 0.5 * (loss(lo) + loss(hi)) * (hi - lo);
        }
        return area / 3600.0;
    }

    double
    system_eoh(NetworkSeries const& series, Mop mop, double t0, double T)
    {
        return system_eoh(series.time, mop_curve(series, mop), t0, T);
    }

    std::optional<double>
    consumer_eoh(NetworkSeries const& series, std::size_t consumer, double t0, double T)
    {
        std::vector<std::optional<double>> ratio(series.size());
        bool any = false;
        for (std::size_t k = 0; k < series.size(); ++k)
        {
            double const S = series.demand[k][consumer];
            if (S > 0.0)
            {
                ratio[k] = std::clamp(series.supply[k][consumer] / S, 0.0, 1.0);
                any = true;
            }
        }
        if (!any)
        {
            return std::nullopt;
        }
        return system_eoh(series.time, ratio, t0, T);
    }

    double
    weighted_eoh(
        std::map<std::string, double> const& eoh_by_network,
        std::map<std::string, double> const& weights)
    {
        double total = 0.0;
        for (auto const& [k, w] : weights)
        {
            if (w < 0.0)
            {
                throw std::invalid_argument("EOH weights must be non-negative");
            }
            auto it = eoh_by_network.find(k);
            if (it != eoh_by_network.end())
            {
                total += w * it->second;
            }
        }
        return total;
    }

    std::map<std::string, double>
    default_eoh_weights()
    {
        return {{"water", 0.5}, {"power", 0.5}};
    }

    double
    ResilienceReport::eoh(std::string const& network) const
    {
        auto const& n = networks.at(network);
        return mop == Mop::ecs ? n.eoh_ecs : n.eoh_pcs;
    }

    ResilienceReport
    make_report(PerformanceTimeSeries const& series, Mop mop, std::map<std::string, double> weights)
    {
        ResilienceReport r;
        r.mop = mop;
        r.t0 = series.start;
        r.T = series.end;
        r.weights = std::move(weights);
        std::map<std::string, double> eoh;
        for (auto const& [name, s] : {std::pair<std::string, NetworkSeries const*>{"water", &series.water},
                                      std::pair<std::string, NetworkSeries const*>{"power", &series.power}})
        {
            if (s->size() == 0)
            {
                continue;
            }
            NetworkReport n;
            n.time = s->time;
            n.ecs = mop_curve(*s, Mop::ecs);
            n.pcs = mop_curve(*s, Mop::pcs);
            n.eoh_ecs = system_eoh(n.time, n.ecs, r.t0, r.T);
            n.eoh_pcs = system_eoh(n.time, n.pcs, r.t0, r.T);
            for (std::size_t i = 0; i < s->consumers.size(); ++i)
            {
                n.consumer_eoh[s->consumers[i]] = consumer_eoh(*s, i, r.t0, r.T);
            }
            eoh[name] = mop == Mop::ecs ? n.eoh_ecs : n.eoh_pcs;
            r.networks[name] = std::move(n);
        }
        r.weighted_eoh = weighted_eoh(eoh, r.weights);
        return r;
    }
}
