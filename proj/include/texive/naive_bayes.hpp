#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace texive {

// Specialize with: static std::string_view name(L); static std::optional<L> parse(std::string_view);
// static int rank(L). Rank gives the canonical order used for ties and storage.
template <typename Label>
struct LabelTraits;

inline constexpr double kVarianceFloor = 1e-6;

template <typename Label>
struct ClassStats {
    Label label{};
    double prior = 0;
    std::size_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;  // sum of squared deviations from the mean

    bool operator==(const ClassStats&) const = default;
};

template <typename Label>
struct Posterior {
    std::vector<std::pair<Label, double>> probs;  // canonical label order

    double of(Label l) const {
        for (const auto& [lab, p] : probs)
            if (lab == l) return p;
        return 0.0;
    }
};

template <typename Label>
struct Prediction {
    Label label{};
    Posterior<Label> posterior;
};

// Gaussian naive Bayes with per-class diagonal variances. Batch training uses a
// two-pass mean/deviation computation; online updates use Welford's recurrence.
template <typename Label>
class GaussianNaiveBayes {
public:
    using Traits = LabelTraits<Label>;
    using Example = std::pair<std::vector<double>, Label>;

    GaussianNaiveBayes() = default;

    static GaussianNaiveBayes train(std::span<const Example> examples, double variance_floor = kVarianceFloor) {
        std::map<int, std::vector<const Example*>> by_class;
        std::size_t dim = 0;
        for (const auto& ex : examples) {
            if (dim == 0) dim = ex.first.size();
            if (ex.first.size() != dim || dim == 0)
                throw Error(Errc::DimensionMismatch, "training examples differ in feature length");
            by_class[Traits::rank(ex.second)].push_back(&ex);
        }
        if (by_class.size() < 2) throw Error(Errc::InsufficientExamples, "need at least 2 classes");
        GaussianNaiveBayes m;
        m.dim_ = dim;
        m.floor_ = variance_floor;
        for (const auto& [rank, members] : by_class) {
            if (members.size() < 2)
                throw Error(Errc::InsufficientExamples,
                            "class " + std::string(Traits::name(members.front()->second)) + " has fewer than 2 examples");
            ClassStats<Label> c;
            c.label = members.front()->second;
            c.count = members.size();
            c.mean.assign(dim, 0.0);
            c.m2.assign(dim, 0.0);
            for (const auto* ex : members)
                for (std::size_t i = 0; i < dim; ++i) c.mean[i] += ex->first[i];
            for (auto& v : c.mean) v /= static_cast<double>(c.count);
            for (const auto* ex : members)
                for (std::size_t i = 0; i < dim; ++i) {
                    const double d = ex->first[i] - c.mean[i];
                    c.m2[i] += d * d;
                }
            m.classes_.push_back(std::move(c));
        }
        m.renormalize_priors();
        return m;
    }

    bool empty() const { return classes_.empty(); }
    std::size_t dim() const { return dim_; }
    double variance_floor() const { return floor_; }
    const std::vector<ClassStats<Label>>& classes() const { return classes_; }

    double variance(std::size_t cls, std::size_t i) const {
        const auto& c = classes_[cls];
        return std::max(c.m2[i] / static_cast<double>(c.count), floor_);
    }

    // Per-class log prior + log likelihood, canonical order.
    std::vector<double> log_joint(std::span<const double> x) const {
        check_input(x);
        std::vector<double> out(classes_.size());
        constexpr double log_2pi = 1.8378770664093453;  // log(2*pi)
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            double acc = std::log(classes_[c].prior);
            for (std::size_t i = 0; i < dim_; ++i) {
                const double var = variance(c, i);
                const double d = x[i] - classes_[c].mean[i];
                acc -= 0.5 * (log_2pi + std::log(var) + d * d / var);
            }
            out[c] = acc;
        }
        return out;
    }

    Prediction<Label> classify(std::span<const double> x) const {
        const auto lj = log_joint(x);
        std::size_t best = 0;
        for (std::size_t c = 1; c < lj.size(); ++c)
            if (lj[c] > lj[best]) best = c;
        double sum = 0;
        std::vector<double> p(lj.size());
        for (std::size_t c = 0; c < lj.size(); ++c) {
            p[c] = std::exp(lj[c] - lj[best]);
            sum += p[c];
        }
        Prediction<Label> out;
        out.label = classes_[best].label;
        out.posterior.probs.reserve(lj.size());
        for (std::size_t c = 0; c < lj.size(); ++c) out.posterior.probs.emplace_back(classes_[c].label, p[c] / sum);
        return out;
    }

    GaussianNaiveBayes update(std::span<const double> x, Label label, bool allow_new_class = false) const {
        check_input(x);
        GaussianNaiveBayes m = *this;
        auto it = std::find_if(m.classes_.begin(), m.classes_.end(), [&](const auto& c) { return c.label == label; });
        if (it == m.classes_.end()) {
            if (!allow_new_class)
                throw Error(Errc::InvalidParams, "label " + std::string(Traits::name(label)) + " unknown to model");
            ClassStats<Label> c;
            c.label = label;
            c.count = 1;
            c.mean.assign(x.begin(), x.end());
            c.m2.assign(dim_, 0.0);
            auto pos = std::find_if(m.classes_.begin(), m.classes_.end(),
                                    [&](const auto& o) { return Traits::rank(o.label) > Traits::rank(label); });
            m.classes_.insert(pos, std::move(c));
        } else {
            auto& c = *it;
            c.count += 1;
            const double n = static_cast<double>(c.count);
            for (std::size_t i = 0; i < dim_; ++i) {
                const double delta = x[i] - c.mean[i];
                c.mean[i] += delta / n;
                c.m2[i] += delta * (x[i] - c.mean[i]);
            }
        }
        m.renormalize_priors();
        return m;
    }

    // Direct construction, used by the model file reader.
    static GaussianNaiveBayes from_parts(std::size_t dim, double floor, std::vector<ClassStats<Label>> classes) {
        GaussianNaiveBayes m;
        m.dim_ = dim;
        m.floor_ = floor;
        m.classes_ = std::move(classes);
        std::sort(m.classes_.begin(), m.classes_.end(),
                  [](const auto& a, const auto& b) { return Traits::rank(a.label) < Traits::rank(b.label); });
        return m;
    }

    bool operator==(const GaussianNaiveBayes&) const = default;

private:
    void check_input(std::span<const double> x) const {
        if (classes_.empty()) throw Error(Errc::ModelNotTrained, "model has no classes");
        if (x.size() != dim_)
            throw Error(Errc::DimensionMismatch,
                        "feature length " + std::to_string(x.size()) + " != model dim " + std::to_string(dim_));
    }

    void renormalize_priors() {
        double total = 0;
        for (const auto& c : classes_) total += static_cast<double>(c.count);
        for (auto& c : classes_) c.prior = static_cast<double>(c.count) / total;
    }

    std::size_t dim_ = 0;
    double floor_ = kVarianceFloor;
    std::vector<ClassStats<Label>> classes_;
};

} // namespace texive
