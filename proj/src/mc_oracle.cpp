#include "sme/mc_oracle.hpp"

#include "sme/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace sme {
namespace {

constexpr double kEnvelopeSlack = 1e-12;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t batch_size(const OracleConfig& cfg, std::size_t b) {
    const std::uint64_t B = cfg.batches;
    return cfg.sample_count / B + (b < cfg.sample_count % B ? 1 : 0);
}

// Run fn(b) for every batch, spread over worker threads.
void parallel_batches(const OracleConfig& cfg, const std::function<void(std::size_t)>& fn) {
    unsigned threads = cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.batches));
    if (threads <= 1) {
        for (std::size_t b = 0; b < cfg.batches; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t b = t; b < cfg.batches; b += threads) fn(b);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void check_config(const OracleConfig& cfg) {
    if (cfg.sample_count == 0) throw DomainError("sample count must be positive");
    if (cfg.batches < 2) throw DomainError("need at least two batches");
    if (cfg.sample_count < cfg.batches) throw DomainError("fewer samples than batches");
}

Estimate batch_means(const std::vector<double>& per_batch, const std::vector<double>& weights) {
    // weighted mean of batch estimates; error from their spread
    double wsum = 0.0, mean = 0.0;
    for (std::size_t b = 0; b < per_batch.size(); ++b) {
        mean += weights[b] * per_batch[b];
        wsum += weights[b];
    }
    mean /= wsum;
    double ss = 0.0;
    for (double v : per_batch) ss += (v - mean) * (v - mean);
    const double B = static_cast<double>(per_batch.size());
    return {mean, std::sqrt(ss / (B - 1.0) / B)};
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw DomainError("no samples");
    auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
    idx = std::clamp<std::size_t>(idx, 1, values.size()) - 1;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(idx), values.end());
    return values[idx];
}

bool needs_var(Target::Kind k) {
    using K = Target::Kind;
    return k == K::Var || k == K::Tvar || k == K::Contribution;
}

bool needs_reinsured_var(Target::Kind k) {
    using K = Target::Kind;
    return k == K::ReinsuredVar || k == K::ReinsuredTvar || k == K::ReinsuredContribution;
}

}  // namespace

std::mt19937_64 batch_rng(std::uint64_t seed, std::uint64_t batch) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(batch + 1)));
}

SarmanovSampler::SarmanovSampler(const SarmanovModel& model) : model_(&model), envelope_(1.0) {
    for (std::size_t g = 0; g < model.zeta(); ++g) marginals_.emplace_back(model.marginal(g));
    auto spread = [&](std::size_t g) {
        return std::max(model.gamma(g), model.density_max(g) - model.gamma(g));
    };
    for (const auto& c : model.couplings()) envelope_ += std::abs(c.alpha) * spread(c.i) * spread(c.j);
}

std::uint64_t SarmanovSampler::draw(std::mt19937_64& rng, double* x) const {
    const std::size_t z = marginals_.size();
    thread_local std::vector<double> f;
    f.resize(z);
    for (std::uint64_t tries = 1;; ++tries) {
        for (std::size_t g = 0; g < z; ++g) x[g] = marginals_[g](rng);
        if (model_->couplings().empty()) return tries;
        for (std::size_t g = 0; g < z; ++g) f[g] = model_->marginal(g).pdf(x[g]) - model_->gamma(g);
        double bracket = 1.0;
        for (const auto& c : model_->couplings()) bracket += c.alpha * f[c.i] * f[c.j];
        if (bracket > envelope_ * (1.0 + kEnvelopeSlack) || bracket < -kEnvelopeSlack) {
            throw EnvelopeViolation("bracket " + std::to_string(bracket) + " outside [0, " +
                                    std::to_string(envelope_) + "]");
        }
        if (uniform01(rng) * envelope_ < bracket) return tries;
    }
}

SampleMatrix sample(const SarmanovModel& model, const OracleConfig& cfg) {
    check_config(cfg);
    const SarmanovSampler sampler(model);
    const std::size_t z = model.zeta();
    SampleMatrix out;
    out.dims = z;
    out.data.resize(cfg.sample_count * z);
    std::vector<std::uint64_t> start(cfg.batches + 1, 0);
    for (std::size_t b = 0; b < cfg.batches; ++b) start[b + 1] = start[b] + batch_size(cfg, b);
    parallel_batches(cfg, [&](std::size_t b) {
        auto rng = batch_rng(cfg.seed, b);
        for (std::uint64_t i = start[b]; i < start[b + 1]; ++i) sampler.draw(rng, out.data.data() + i * z);
    });
    return out;
}

std::string Target::describe() const {
    auto pt = [&] {
        std::string s;
        for (std::size_t i = 0; i < point.size(); ++i) s += (i ? "," : "") + std::to_string(point[i]);
        return s;
    };
    auto who = [&](const char* prefix) {
        return unit == kAggregate ? std::string("S") : std::string(prefix) + std::to_string(unit + 1);
    };
    switch (kind) {
        case Kind::JointDf: return "joint_df(" + pt() + ")";
        case Kind::AggregateCdf: return "aggregate_cdf(" + pt() + ")";
        case Kind::RawMoment: return "E[" + who("X") + "^" + std::to_string(order) + "]";
        case Kind::Var: return "VaR(" + std::to_string(level) + ")";
        case Kind::Tvar: return "TVaR(" + std::to_string(level) + ")";
        case Kind::Contribution: return "C_" + std::to_string(unit + 1) + "(" + std::to_string(level) + ")";
        case Kind::ReinsuredVar: return "reinsured_VaR(" + std::to_string(level) + ")";
        case Kind::ReinsuredTvar: return "reinsured_TVaR(" + std::to_string(level) + ")";
        case Kind::ReinsuredContribution:
            return "reinsured_C_" + std::to_string(unit + 1) + "(" + std::to_string(level) + ")";
    }
    return "?";
}

OracleReport run_oracle(const SarmanovModel& model, const OracleConfig& cfg, const std::vector<Target>& targets) {
    using K = Target::Kind;
    check_config(cfg);
    const SarmanovSampler sampler(model);
    const std::size_t z = model.zeta();
    const std::size_t n = model.portfolio_count();
    const std::size_t B = cfg.batches;
    const auto& ded = model.deductibles();

    bool want_s = false, want_r = false;
    for (const auto& t : targets) {
        want_s = want_s || needs_var(t.kind);
        want_r = want_r || needs_reinsured_var(t.kind);
        if (needs_reinsured_var(t.kind) && !ded) throw DomainError("reinsured targets need deductibles");
        if (t.kind == K::JointDf && t.point.size() != n) throw DomainError("joint_df point needs one entry per portfolio");
        if (t.kind == K::AggregateCdf && t.point.size() != 1) throw DomainError("aggregate_cdf takes one point");
        if ((needs_var(t.kind) || needs_reinsured_var(t.kind)) && !(t.level > 0.0 && t.level < 1.0)) {
            throw DomainError("probability level must lie in (0, 1)");
        }
        if (t.kind == K::Contribution && t.unit >= z) throw OutOfBounds("no such risk");
        if (t.kind == K::ReinsuredContribution && t.unit >= n) throw OutOfBounds("no such portfolio");
        if (t.kind == K::RawMoment && t.unit != Target::kAggregate && t.unit >= z) throw OutOfBounds("no such risk");
    }

    std::vector<std::uint64_t> start(B + 1, 0);
    for (std::size_t b = 0; b < B; ++b) start[b + 1] = start[b] + batch_size(cfg, b);
    std::vector<double> batch_n(B);
    for (std::size_t b = 0; b < B; ++b) batch_n[b] = static_cast<double>(start[b + 1] - start[b]);

    // Pass 1: stored totals for the quantiles, plus every target not needing one.
    std::vector<double> totals(want_s ? cfg.sample_count : 0);
    std::vector<double> reinsured(want_r ? cfg.sample_count : 0);
    std::vector<std::vector<double>> sums(targets.size(), std::vector<double>(B, 0.0));
    std::vector<std::uint64_t> proposals(B, 0);

    auto portfolio_sums = [&](const double* x, std::vector<double>& s) {
        std::fill(s.begin(), s.end(), 0.0);
        for (std::size_t g = 0; g < z; ++g) s[model.risk_id(g).portfolio] += x[g];
    };

    parallel_batches(cfg, [&](std::size_t b) {
        auto rng = batch_rng(cfg.seed, b);
        std::vector<double> x(z), s(n);
        for (std::uint64_t i = start[b]; i < start[b + 1]; ++i) {
            proposals[b] += sampler.draw(rng, x.data());
            portfolio_sums(x.data(), s);
            double total = 0.0;
            for (double v : s) total += v;
            double r = 0.0;
            if (ded) {
                for (std::size_t a = 0; a < n; ++a) r += std::max(0.0, s[a] - (*ded)[a]);
            }
            if (want_s) totals[i] = total;
            if (want_r) reinsured[i] = r;
            for (std::size_t t = 0; t < targets.size(); ++t) {
                const auto& tg = targets[t];
                switch (tg.kind) {
                    case K::JointDf: {
                        bool in = true;
                        for (std::size_t a = 0; a < n; ++a) in = in && s[a] <= tg.point[a];
                        sums[t][b] += in ? 1.0 : 0.0;
                        break;
                    }
                    case K::AggregateCdf: sums[t][b] += total <= tg.point[0] ? 1.0 : 0.0; break;
                    case K::RawMoment:
                        sums[t][b] += std::pow(tg.unit == Target::kAggregate ? total : x[tg.unit], tg.order);
                        break;
                    default: break;
                }
            }
        }
    });

    OracleReport report;
    report.targets = targets;
    report.samples = cfg.sample_count;
    report.seed = cfg.seed;
    for (auto p : proposals) report.proposals += p;
    report.estimates.resize(targets.size());

    // global quantiles per requested level
    auto quantile_of = [&](const std::vector<double>& v, double p) { return empirical_quantile(v, p); };
    std::vector<double> threshold(targets.size(), 0.0);
    bool need_second_pass = false;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& tg = targets[t];
        if (needs_var(tg.kind)) threshold[t] = quantile_of(totals, tg.level);
        if (needs_reinsured_var(tg.kind)) threshold[t] = quantile_of(reinsured, tg.level);
        need_second_pass = need_second_pass || tg.kind == K::Contribution || tg.kind == K::ReinsuredContribution;
    }

    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto& tg = targets[t];
        std::vector<double> per_batch(B);
        switch (tg.kind) {
            case K::JointDf:
            case K::AggregateCdf:
            case K::RawMoment:
                for (std::size_t b = 0; b < B; ++b) per_batch[b] = sums[t][b] / batch_n[b];
                report.estimates[t] = batch_means(per_batch, batch_n);
                break;
            case K::Var:
            case K::ReinsuredVar: {
                const auto& v = tg.kind == K::Var ? totals : reinsured;
                for (std::size_t b = 0; b < B; ++b) {
                    per_batch[b] = empirical_quantile(
                        std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(start[b]),
                                            v.begin() + static_cast<std::ptrdiff_t>(start[b + 1])),
                        tg.level);
                }
                const Estimate spread = batch_means(per_batch, batch_n);
                report.estimates[t] = {threshold[t], spread.std_error};
                break;
            }
            case K::Tvar:
            case K::ReinsuredTvar: {
                const auto& v = tg.kind == K::Tvar ? totals : reinsured;
                for (std::size_t b = 0; b < B; ++b) {
                    double acc = 0.0;
                    for (std::uint64_t i = start[b]; i < start[b + 1]; ++i) {
                        if (v[i] > threshold[t]) acc += v[i];
                    }
                    per_batch[b] = acc / batch_n[b] / (1.0 - tg.level);
                }
                report.estimates[t] = batch_means(per_batch, batch_n);
                break;
            }
            default: break;
        }
    }

    if (need_second_pass) {
        std::vector<std::vector<double>> acc(targets.size(), std::vector<double>(B, 0.0));
        parallel_batches(cfg, [&](std::size_t b) {
            auto rng = batch_rng(cfg.seed, b);
            std::vector<double> x(z), s(n);
            for (std::uint64_t i = start[b]; i < start[b + 1]; ++i) {
                sampler.draw(rng, x.data());
                portfolio_sums(x.data(), s);
                for (std::size_t t = 0; t < targets.size(); ++t) {
                    const auto& tg = targets[t];
                    if (tg.kind == K::Contribution && totals[i] > threshold[t]) acc[t][b] += x[tg.unit];
                    if (tg.kind == K::ReinsuredContribution && reinsured[i] > threshold[t]) {
                        acc[t][b] += std::max(0.0, s[tg.unit] - (*ded)[tg.unit]);
                    }
                }
            }
        });
        for (std::size_t t = 0; t < targets.size(); ++t) {
            const auto& tg = targets[t];
            if (tg.kind != K::Contribution && tg.kind != K::ReinsuredContribution) continue;
            std::vector<double> per_batch(B);
            for (std::size_t b = 0; b < B; ++b) per_batch[b] = acc[t][b] / batch_n[b] / (1.0 - tg.level);
            report.estimates[t] = batch_means(per_batch, batch_n);
        }
    }
    return report;
}

Estimate estimate(const SarmanovModel& model, const OracleConfig& cfg, const Target& target) {
    return run_oracle(model, cfg, {target}).estimates.front();
}

}  // namespace sme
