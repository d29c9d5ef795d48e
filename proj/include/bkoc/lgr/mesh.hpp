#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace bkoc::lgr {

/// Partition of [-1, +1] into K intervals with a collocation degree per
/// interval.
struct Mesh {
    std::vector<double> boundaries;  // K+1 strictly increasing, first -1, last +1
    std::vector<int> degrees;        // K entries, each >= 2

    static Mesh uniform(int intervals, int degree) {
        if (intervals < 1) throw std::invalid_argument("Mesh: need at least one interval");
        Mesh m;
        m.boundaries.resize(intervals + 1);
        for (int k = 0; k <= intervals; ++k)
            m.boundaries[k] = -1.0 + 2.0 * k / static_cast<double>(intervals);
        m.boundaries.front() = -1.0;
        m.boundaries.back() = 1.0;
        m.degrees.assign(intervals, degree);
        m.validate();
        return m;
    }

    int intervals() const { return static_cast<int>(degrees.size()); }
    int total_collocation_points() const {
        return std::accumulate(degrees.begin(), degrees.end(), 0);
    }

    void validate() const {
        if (degrees.empty() || boundaries.size() != degrees.size() + 1)
            throw std::invalid_argument("Mesh: inconsistent sizes");
        if (boundaries.front() != -1.0 || boundaries.back() != 1.0)
            throw std::invalid_argument("Mesh: boundaries must span [-1, +1]");
        for (std::size_t k = 0; k + 1 < boundaries.size(); ++k)
            if (!(boundaries[k] < boundaries[k + 1]))
                throw std::invalid_argument("Mesh: boundaries must be strictly increasing");
        for (int d : degrees)
            if (d < 2) throw std::invalid_argument("Mesh: degrees must be >= 2");
    }
};

}  // namespace bkoc::lgr
