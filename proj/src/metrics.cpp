#include "anp/metrics.hpp"

#include <cmath>

namespace anp {

std::vector<std::uint64_t> accuracy_histogram(const std::vector<double>& accuracies_pct,
                                              double bin_width) {
    if (!(bin_width > 0.0) || bin_width > 100.0)
        throw ValueError("accuracy_histogram: bin_width must lie in (0, 100]");
    const std::size_t n_bins = static_cast<std::size_t>(std::ceil(100.0 / bin_width));
    std::vector<std::uint64_t> bins(n_bins, 0);
    for (const double a : accuracies_pct) {
        if (!(a >= 0.0) || a > 100.0)
            throw ValueError("accuracy_histogram: accuracy " + std::to_string(a) + " outside [0, 100]");
        std::size_t idx = static_cast<std::size_t>(a / bin_width);
        if (idx >= n_bins) idx = n_bins - 1;  // 100 falls into the closed last bin
        ++bins[idx];
    }
    return bins;
}

}  // namespace anp
