#include "lineage/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include <fmt/format.h>

namespace lineage::structure {

namespace {

using graph::LineageGraph;
using graph::NodeId;

std::optional<graph::RelationType> relation_of(Scope scope) {
    switch (scope) {
        case Scope::overall: return std::nullopt;
        case Scope::finetune: return graph::RelationType::finetune;
        case Scope::adapter: return graph::RelationType::adapter;
        case Scope::quantized: return graph::RelationType::quantized;
        case Scope::merge: return graph::RelationType::merge;
    }
    return std::nullopt;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), NodeId{0});
    }

    NodeId find(NodeId v) {
        NodeId root = v;
        while (parent_[root] != root) {
            root = parent_[root];
        }
        while (parent_[v] != root) {
            v = std::exchange(parent_[v], root);
        }
        return root;
    }

    void unite(NodeId a, NodeId b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        if (size_[a] < size_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<NodeId> parent_;
    std::vector<std::size_t> size_;
};

std::ofstream open_csv(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw DataError{fmt::format("cannot write '{}'", path.string())};
    }
    return out;
}

/// P(X <= x) under the fitted tail, for integer x >= x_min - 1.
class TailModel {
public:
    TailModel(double alpha, std::size_t x_min, PowerLawEstimator estimator)
        : alpha_{alpha}, x_min_{static_cast<double>(x_min)}, estimator_{estimator} {
        if (estimator_ == PowerLawEstimator::discrete_exact) {
            norm_ = hurwitz_zeta(alpha_, x_min_);
        }
    }

    double cdf(double x) const {
        if (estimator_ == PowerLawEstimator::continuous_approx) {
            return 1.0 - std::pow((x + 0.5) / (x_min_ - 0.5), 1.0 - alpha_);
        }
        return 1.0 - hurwitz_zeta(alpha_, x + 1.0) / norm_;
    }

private:
    double alpha_;
    double x_min_;
    PowerLawEstimator estimator_;
    double norm_ = 1.0;
};

/// argmax of -alpha * log_sum - n * ln zeta(alpha, x_min). The objective is
/// concave in alpha, so a golden-section search on a wide bracket suffices.
double discrete_mle(double log_sum, double n, std::size_t x_min) {
    const double q = static_cast<double>(x_min);
    const auto objective = [&](double a) { return -a * log_sum - n * std::log(hurwitz_zeta(a, q)); };
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 1.0 + 1e-6;
    double hi = 30.0;
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    double fc = objective(c);
    double fd = objective(d);
    while (hi - lo > 1e-10) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kInvPhi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kInvPhi * (hi - lo);
            fd = objective(d);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

const char* to_string(Scope scope) {
    switch (scope) {
        case Scope::overall: return "overall";
        case Scope::finetune: return "finetune";
        case Scope::adapter: return "adapter";
        case Scope::quantized: return "quantized";
        case Scope::merge: return "merge";
    }
    return "overall";
}

std::size_t DegreeDistribution::node_count() const {
    std::size_t total = 0;
    for (const auto& [degree, count] : histogram) {
        total += count;
    }
    return total;
}

std::size_t DegreeDistribution::degree_sum() const {
    std::size_t total = 0;
    for (const auto& [degree, count] : histogram) {
        total += degree * count;
    }
    return total;
}

std::vector<std::size_t> DegreeDistribution::positive_samples() const {
    std::vector<std::size_t> out;
    for (const auto& [degree, count] : histogram) {
        if (degree > 0) {
            out.insert(out.end(), count, degree);
        }
    }
    return out;
}

DegreeDistribution in_degrees(const LineageGraph& graph, Scope scope) {
    DegreeDistribution dist;
    dist.scope = scope;
    const auto relation = relation_of(scope);
    std::vector<std::size_t> degree(graph.node_count(), 0);
    for (const auto& e : graph.edges()) {
        if (!relation || e.relation == *relation) {
            ++degree[e.parent];
        }
    }
    for (const std::size_t d : degree) {
        ++dist.histogram[d];
    }
    return dist;
}

const char* to_string(PowerLawEstimator estimator) {
    return estimator == PowerLawEstimator::continuous_approx ? "continuous_approx" : "discrete_exact";
}

double hurwitz_zeta(double s, double q) {
    // Euler-Maclaurin: direct sum of the first terms, then the integral,
    // half-term and Bernoulli corrections at a = q + kDirect.
    constexpr int kDirect = 12;
    double sum = 0.0;
    for (int k = 0; k < kDirect; ++k) {
        sum += std::pow(q + k, -s);
    }
    const double a = q + kDirect;
    sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
    static constexpr double kBernoulli[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0,
                                            1.0 / 47900160.0};
    double rising = s;
    double power = std::pow(a, -s - 1.0);
    for (int j = 0; j < 5; ++j) {
        sum += kBernoulli[j] * rising * power;
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
        power /= a * a;
    }
    return sum;
}

double ks_distance(std::span<const std::size_t> tail, double alpha, std::size_t x_min, PowerLawEstimator estimator) {
    const double n = static_cast<double>(tail.size());
    const TailModel model{alpha, x_min, estimator};
    double d = 0.0;
    // Below the first observation the empirical CDF is still 0.
    if (!tail.empty() && tail.front() > x_min) {
        d = std::max(d, model.cdf(static_cast<double>(tail.front() - 1)));
    }
    std::size_t i = 0;
    while (i < tail.size()) {
        const std::size_t value = tail[i];
        std::size_t j = i;
        while (j < tail.size() && tail[j] == value) {
            ++j;
        }
        const double empirical = static_cast<double>(j) / n;
        d = std::max(d, std::abs(empirical - model.cdf(static_cast<double>(value))));
        // The empirical CDF stays flat until the next observed value.
        if (j < tail.size() && tail[j] > value + 1) {
            d = std::max(d, std::abs(empirical - model.cdf(static_cast<double>(tail[j] - 1))));
        }
        i = j;
    }
    return d;
}

PowerLawFit fit_power_law(std::span<const std::size_t> samples, std::optional<XminRange> x_min_search,
                          PowerLawEstimator estimator) {
    std::vector<std::size_t> data;
    data.reserve(samples.size());
    for (const std::size_t s : samples) {
        if (s > 0) {
            data.push_back(s);
        }
    }
    if (data.size() < kMinTailObservations) {
        throw InsufficientTail{fmt::format("power-law fit needs at least {} positive observations, got {}",
                                           kMinTailObservations, data.size())};
    }
    std::sort(data.begin(), data.end());

    XminRange range;
    if (x_min_search) {
        range = *x_min_search;
    } else {
        const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(data.size())));
        range = {1, data[std::max<std::size_t>(rank, 1) - 1]};
    }
    range.lo = std::max<std::size_t>(range.lo, 1);

    std::optional<PowerLawFit> best;
    for (std::size_t x_min = range.lo; x_min <= range.hi; ++x_min) {
        const auto first = std::lower_bound(data.begin(), data.end(), x_min);
        const std::span<const std::size_t> tail{first, data.end()};
        if (tail.size() < kMinTailObservations || tail.front() == tail.back()) {
            continue;
        }
        const double offset = static_cast<double>(x_min) - 0.5;
        double log_sum = 0.0;
        for (const std::size_t x : tail) {
            log_sum += std::log(static_cast<double>(x));
        }
        const double n = static_cast<double>(tail.size());
        PowerLawFit fit;
        fit.estimator = estimator;
        fit.alpha = estimator == PowerLawEstimator::continuous_approx
                        ? 1.0 + n / (log_sum - n * std::log(offset))
                        : discrete_mle(log_sum, n, x_min);
        fit.x_min = x_min;
        fit.n_tail = tail.size();
        fit.ks_distance = ks_distance(tail, fit.alpha, x_min, estimator);
        fit.alpha_stderr = (fit.alpha - 1.0) / std::sqrt(n);
        if (!best || fit.ks_distance < best->ks_distance) {
            best = fit;
        }
    }
    if (!best) {
        throw InsufficientTail{"no x_min candidate leaves a non-degenerate tail"};
    }
    return *best;
}

PowerLawFit fit_power_law(const DegreeDistribution& dist, std::optional<XminRange> x_min_search,
                          PowerLawEstimator estimator) {
    const auto samples = dist.positive_samples();
    return fit_power_law(samples, x_min_search, estimator);
}

nlohmann::json PowerLawFit::to_json() const {
    return {{"alpha", alpha}, {"x_min", x_min}, {"ks_D", ks_distance}, {"n_tail", n_tail},
            {"alpha_stderr", alpha_stderr}, {"estimator", to_string(estimator)}};
}

std::vector<NodeId> component_labels(const LineageGraph& graph) {
    DisjointSets sets{graph.node_count()};
    for (const auto& e : graph.edges()) {
        sets.unite(e.child, e.parent);
    }
    std::vector<NodeId> smallest(graph.node_count(), std::numeric_limits<NodeId>::max());
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        NodeId& s = smallest[sets.find(v)];
        s = std::min(s, v);
    }
    std::vector<NodeId> labels(graph.node_count());
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        labels[v] = smallest[sets.find(v)];
    }
    return labels;
}

WccSummary weakly_connected_components(const LineageGraph& graph) {
    const auto labels = component_labels(graph);
    std::map<NodeId, std::size_t> sizes;
    for (const NodeId label : labels) {
        ++sizes[label];
    }
    WccSummary out;
    out.component_count = sizes.size();
    out.component_sizes.reserve(sizes.size());
    for (const auto& [label, size] : sizes) {
        out.component_sizes.push_back(size);
    }
    std::sort(out.component_sizes.begin(), out.component_sizes.end(), std::greater<>{});
    if (!out.component_sizes.empty()) {
        out.largest_share =
            static_cast<double>(out.component_sizes.front()) / static_cast<double>(graph.node_count());
    }
    return out;
}

nlohmann::json WccSummary::to_json() const {
    return {{"component_count", component_count},
            {"largest_size", component_sizes.empty() ? 0 : component_sizes.front()},
            {"largest_share", largest_share}};
}

void write_degree_csv(const DegreeDistribution& dist, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "degree,count\n";
    for (const auto& [degree, count] : dist.histogram) {
        out << degree << ',' << count << '\n';
    }
}

void write_wcc_csv(const WccSummary& summary, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "component_rank,size\n";
    for (std::size_t i = 0; i < summary.component_sizes.size(); ++i) {
        out << i + 1 << ',' << summary.component_sizes[i] << '\n';
    }
}

}  // namespace lineage::structure
