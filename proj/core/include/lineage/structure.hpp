#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/errors.hpp"
#include "lineage/graph.hpp"

namespace lineage::structure {

enum class Scope { overall, finetune, adapter, quantized, merge };

inline constexpr std::array<Scope, 5> kAllScopes{Scope::overall, Scope::finetune, Scope::adapter, Scope::quantized,
                                                 Scope::merge};

const char* to_string(Scope scope);

/// In-degree histogram over every node of the graph. For relation scopes only
/// edges of that relation are counted, so most nodes land in bucket 0.
struct DegreeDistribution {
    Scope scope = Scope::overall;
    std::map<std::size_t, std::size_t> histogram;

    std::size_t node_count() const;
    /// Sum of degree * count, i.e. the number of edges in scope.
    std::size_t degree_sum() const;
    /// Every positive degree, expanded and ascending.
    std::vector<std::size_t> positive_samples() const;
};

DegreeDistribution in_degrees(const graph::LineageGraph& graph, Scope scope);

struct XminRange {
    std::size_t lo = 1;
    std::size_t hi = 1;
};

/// How alpha is estimated for a given x_min.
enum class PowerLawEstimator {
    /// Maximises the exact discrete likelihood x^-alpha / zeta(alpha, x_min);
    /// the fitted tail is P(X >= x) = zeta(alpha, x) / zeta(alpha, x_min).
    discrete_exact,
    /// alpha = 1 + n / sum(ln(x / (x_min - 0.5))) with the fitted tail
    /// P(X >= x) = ((x - 0.5) / (x_min - 0.5))^(1 - alpha). Biased for small x_min.
    continuous_approx,
};

const char* to_string(PowerLawEstimator estimator);

struct PowerLawFit {
    double alpha = 0.0;
    std::size_t x_min = 1;
    double ks_distance = 1.0;
    std::size_t n_tail = 0;
    /// (alpha - 1) / sqrt(n_tail)
    double alpha_stderr = 0.0;
    PowerLawEstimator estimator = PowerLawEstimator::discrete_exact;

    nlohmann::json to_json() const;
};

class InsufficientTail : public DataError {
public:
    using DataError::DataError;
};

/// Minimum tail size for a candidate x_min, and for the input as a whole.
inline constexpr std::size_t kMinTailObservations = 10;

/// Hurwitz zeta function sum_{k>=0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

/// Discrete power-law fit with x_min chosen by minimum KS distance over the
/// tail. Zero degrees are ignored. The default x_min search is
/// [1, 95th percentile of the positive degrees].
PowerLawFit fit_power_law(std::span<const std::size_t> samples, std::optional<XminRange> x_min_search = std::nullopt,
                          PowerLawEstimator estimator = PowerLawEstimator::discrete_exact);

PowerLawFit fit_power_law(const DegreeDistribution& dist, std::optional<XminRange> x_min_search = std::nullopt,
                          PowerLawEstimator estimator = PowerLawEstimator::discrete_exact);

/// KS distance between the empirical CDF of `tail` (ascending, all >= x_min)
/// and the fitted discrete CDF.
double ks_distance(std::span<const std::size_t> tail, double alpha, std::size_t x_min,
                   PowerLawEstimator estimator = PowerLawEstimator::discrete_exact);

struct WccSummary {
    std::size_t component_count = 0;
    /// Descending.
    std::vector<std::size_t> component_sizes;
    double largest_share = 0.0;

    nlohmann::json to_json() const;
};

/// Union-find over the undirected view. labels[v] is the smallest node id in
/// v's component, so equal partitions give equal label vectors.
std::vector<graph::NodeId> component_labels(const graph::LineageGraph& graph);

WccSummary weakly_connected_components(const graph::LineageGraph& graph);

/// CSV "degree,count".
void write_degree_csv(const DegreeDistribution& dist, const std::filesystem::path& path);
/// CSV "component_rank,size", rank starting at 1.
void write_wcc_csv(const WccSummary& summary, const std::filesystem::path& path);

}  // namespace lineage::structure
