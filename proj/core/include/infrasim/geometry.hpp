#pragma once

#include <cmath>
#include <span>

namespace infrasim
{
    /// Planar coordinates in meters.
    struct Point
    {
        double x = 0.0;
        double y = 0.0;

        friend bool operator==(Point const&, Point const&) = default;
    };

    inline double
    distance(Point a, Point b)
    {
        return std::hypot(a.x - b.x, a.y - b.y);
    }

    inline Point
    midpoint(Point a, Point b)
    {
        return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    }

    /// Distance from p to the closed segment [a, b].
    inline double
    distance_to_segment(Point p, Point a, Point b)
    {
        double const dx = b.x - a.x;
        double const dy = b.y - a.y;
        double const len2 = dx * dx + dy * dy;
        if (len2 == 0.0)
        {
            return distance(p, a);
        }
        double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
        t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
        return distance(p, Point{a.x + t * dx, a.y + t * dy});
    }

    /// Minimum distance from p to a polyline. A single vertex degenerates to
    /// point distance; an empty polyline yields +inf.
    inline double
    distance_to_polyline(Point p, std::span<Point const> line)
    {
        if (line.empty())
        {
            return HUGE_VAL;
        }
        if (line.size() == 1)
        {
            return distance(p, line.front());
        }
        double best = HUGE_VAL;
        for (std::size_t i = 0; i + 1 < line.size(); ++i)
        {
            best = std::fmin(best, distance_to_segment(p, line[i], line[i + 1]));
        }
        return best;
    }

    namespace detail
    {
        inline double
        cross(Point o, Point a, Point b)
        {
            return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
        }
    }

    /// Minimum distance between two closed segments (0 if they cross).
    inline double
    segment_distance(Point a, Point b, Point c, Point d)
    {
        double const d1 = detail::cross(c, d, a);
        double const d2 = detail::cross(c, d, b);
        double const d3 = detail::cross(a, b, c);
        double const d4 = detail::cross(a, b, d);
        if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
            ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        {
            return 0.0;
        }
        return std::fmin(
            std::fmin(distance_to_segment(a, c, d), distance_to_segment(b, c, d)),
            std::fmin(distance_to_segment(c, a, b), distance_to_segment(d, a, b)));
    }

    /// Minimum distance between two polylines (points count as degenerate
    /// polylines).
    inline double
    polyline_distance(std::span<Point const> p, std::span<Point const> q)
    {
        if (p.empty() || q.empty())
        {
            return HUGE_VAL;
        }
        if (p.size() == 1)
        {
            return distance_to_polyline(p.front(), q);
        }
        if (q.size() == 1)
        {
            return distance_to_polyline(q.front(), p);
        }
        double best = HUGE_VAL;
        for (std::size_t i = 0; i + 1 < p.size(); ++i)
        {
            for (std::size_t j = 0; j + 1 < q.size(); ++j)
            {
                best = std::fmin(best, segment_distance(p[i], p[i + 1], q[j], q[j + 1]));
            }
        }
        return best;
    }

    /// Axis-aligned box.
    struct Bounds
    {
        Point min;
        Point max;

        double width() const { return max.x - min.x; }
        double height() const { return max.y - min.y; }
    };
}
