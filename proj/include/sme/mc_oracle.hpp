#pragma once

#include "sme/sarmanov_model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sme {

struct OracleConfig {
    std::uint64_t sample_count = 1'000'000;
    std::uint64_t seed = 1;
    /// Independent sub-streams; also the batch count for batch-means errors.
    std::size_t batches = 30;
    /// Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;
};

/// Row-major draws, one row of zeta coordinates per sample.
struct SampleMatrix {
    std::size_t dims = 0;
    std::vector<double> data;

    std::size_t rows() const { return dims == 0 ? 0 : data.size() / dims; }
    const double* row(std::size_t i) const { return data.data() + i * dims; }
};

/// Accept-reject sampler: propose independent marginals, accept with
/// probability bracket / c where c bounds the bracket from above.
class SarmanovSampler {
public:
    explicit SarmanovSampler(const SarmanovModel& model);

    double envelope() const noexcept { return envelope_; }

    /// Writes one accepted draw into x (size zeta); returns the number of proposals used.
    std::uint64_t draw(std::mt19937_64& rng, double* x) const;

private:
    const SarmanovModel* model_;
    std::vector<MixedErlangSampler> marginals_;
    double envelope_;
};

/// Generator for sub-stream `batch` of `seed`.
std::mt19937_64 batch_rng(std::uint64_t seed, std::uint64_t batch);

SampleMatrix sample(const SarmanovModel& model, const OracleConfig& cfg);

struct Target {
    enum class Kind {
        JointDf,                // P(S_a <= point_a for all a)
        AggregateCdf,           // P(S <= y), S the sum of all risks
        RawMoment,              // E[X_unit^order], or E[S^order] when unit == kAggregate
        Var,                    // VaR_p(S)
        Tvar,                   // TVaR_p(S)
        Contribution,           // E[X_unit | S > VaR_p(S)], unit a global risk index
        ReinsuredVar,           // VaR_p(R), R = sum_a (S_a - d_a)_+
        ReinsuredTvar,          // E[R 1{R > VaR_p(R)}] / (1 - p)
        ReinsuredContribution,  // E[(S_unit - d_unit)_+ 1{R > VaR_p(R)}] / (1 - p), unit a portfolio
    };
    static constexpr std::size_t kAggregate = static_cast<std::size_t>(-1);

    Kind kind;
    std::vector<double> point;
    double level = 0.0;
    std::size_t unit = kAggregate;
    int order = 1;

    std::string describe() const;
};

struct Estimate {
    double value;
    double std_error;
};

struct OracleReport {
    std::vector<Target> targets;
    std::vector<Estimate> estimates;
    std::uint64_t samples = 0;
    std::uint64_t proposals = 0;
    std::uint64_t seed = 0;
};

/// Plug-in estimates with batch-means standard errors. VaR-dependent targets
/// use the empirical quantile of all samples; draws are regenerated from the
/// seed rather than stored when per-unit values are needed.
OracleReport run_oracle(const SarmanovModel& model, const OracleConfig& cfg, const std::vector<Target>& targets);

Estimate estimate(const SarmanovModel& model, const OracleConfig& cfg, const Target& target);

}  // namespace sme
