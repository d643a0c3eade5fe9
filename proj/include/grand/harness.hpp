#ifndef GRAND_HARNESS_HPP
#define GRAND_HARNESS_HPP

// Monte Carlo experiment engine.
//
// Every trial is identified by (master seed, Eb/N0, trial index) and draws
// its message and channel noise from its own stream. All policies of a sweep
// decode the same observation. Accumulators are integer sums, so results do
// not depend on the number of workers or their scheduling.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "grand/channel.hpp"
#include "grand/codes.hpp"
#include "grand/decoder.hpp"
#include "grand/patterns.hpp"
#include "grand/rng.hpp"
#include "grand/softout.hpp"

namespace grand {

/// A statistical guard tripped (e.g. too few events to measure anything).
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TrialOutcome { Correct, Incorrect, Abandoned };

inline const char* to_string(TrialOutcome o) {
    switch (o) {
        case TrialOutcome::Correct: return "correct";
        case TrialOutcome::Incorrect: return "incorrect";
        default: return "abandoned";
    }
}

struct TrialRecord {
    std::uint64_t trial = 0;
    double ebn0_db = 0.0;
    std::size_t policy = 0;
    TrialOutcome outcome = TrialOutcome::Abandoned;
    std::uint64_t q = 0;
    std::optional<double> llr_bits;
    bool true_noise_found = false;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double half_width() const { return 0.5 * (hi - lo); }
    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// 95% binomial interval: normal approximation once both the event and
/// non-event counts reach 30, Wilson score interval below that.
inline Interval binomial_interval(std::uint64_t events, std::uint64_t total, double z = 1.959963984540054) {
    if (total == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(total);
    const double p = static_cast<double>(events) / nn;
    if (std::min(events, total - events) >= 30) {
        const double h = z * std::sqrt(p * (1.0 - p) / nn);
        return {std::max(0.0, p - h), std::min(1.0, p + h)};
    }
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double h = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, centre - h), std::min(1.0, centre + h)};
}

inline double binomial_se(std::uint64_t events, std::uint64_t total) {
    if (total == 0) return std::numeric_limits<double>::quiet_NaN();
    const double p = static_cast<double>(events) / static_cast<double>(total);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

/// Statistics of one (policy, Eb/N0) cell.
struct SweepCell {
    std::size_t policy = 0;
    double ebn0_db = 0.0;

    std::uint64_t trials = 0;
    std::uint64_t correct = 0;
    std::uint64_t incorrect = 0;
    std::uint64_t abandoned = 0;
    std::uint64_t abandoned_llr = 0;
    std::uint64_t abandoned_cap = 0;
    std::uint64_t total_queries = 0;

    // Against the tau-less policy with the same order and cap, if present.
    bool has_baseline = false;
    std::uint64_t lost_correct = 0;      // Correct there, Abandoned here
    std::uint64_t converted_errors = 0;  // Incorrect there, Abandoned here
    std::uint64_t monotonicity_violations = 0;

    std::uint64_t nonabandoned() const { return correct + incorrect; }

    static double ratio(std::uint64_t a, std::uint64_t b) {
        return b ? static_cast<double>(a) / static_cast<double>(b) : std::numeric_limits<double>::quiet_NaN();
    }

    double bler() const { return ratio(incorrect + abandoned, trials); }
    double bler_cond() const { return ratio(incorrect, nonabandoned()); }
    double success() const { return ratio(correct, trials); }
    double success_cond() const { return ratio(correct, nonabandoned()); }
    double abandon_frac() const { return ratio(abandoned, trials); }
    double nonabandon_frac() const { return ratio(nonabandoned(), trials); }
    double avg_queries_to_decision() const { return ratio(total_queries, trials); }
    /// All queries spent (including on incorrect and abandoned blocks) per correct decoding.
    double avg_queries_per_success() const { return ratio(total_queries, correct); }

    Interval bler_ci() const { return binomial_interval(incorrect + abandoned, trials); }
    Interval bler_cond_ci() const { return binomial_interval(incorrect, nonabandoned()); }
    Interval success_cond_ci() const { return binomial_interval(correct, nonabandoned()); }
    Interval abandon_ci() const { return binomial_interval(abandoned, trials); }
    double success_cond_se() const { return binomial_se(correct, nonabandoned()); }

    SweepCell& operator+=(const SweepCell& o) {
        trials += o.trials;
        correct += o.correct;
        incorrect += o.incorrect;
        abandoned += o.abandoned;
        abandoned_llr += o.abandoned_llr;
        abandoned_cap += o.abandoned_cap;
        total_queries += o.total_queries;
        lost_correct += o.lost_correct;
        converted_errors += o.converted_errors;
        monotonicity_violations += o.monotonicity_violations;
        return *this;
    }
};

struct SweepOptions {
    std::vector<DecodePolicy> policies;
    std::vector<double> ebn0_points;
    std::uint64_t trials_per_point = 1000;
    std::uint64_t master_seed = 1;
    unsigned workers = 1;

    // Points where some thresholded policy abandons more than this fraction
    // get more trials, doubling up to escalate_cap_factor × trials_per_point,
    // until that policy has escalate_min_events non-abandoned decodings.
    double escalate_abandon_frac = 0.98;
    std::uint64_t escalate_min_events = 100;
    std::uint64_t escalate_cap_factor = 16;

    bool keep_records = false;
};

struct SweepResult {
    std::size_t num_policies = 0;
    std::vector<double> ebn0_points;
    std::vector<SweepCell> cells;      // point-major: cells[point * num_policies + policy]
    std::vector<TrialRecord> records;  // sorted by (Eb/N0 point, trial, policy)

    const SweepCell& cell(std::size_t policy, std::size_t point) const { return cells[point * num_policies + policy]; }

    std::uint64_t monotonicity_violations() const {
        std::uint64_t v = 0;
        for (const auto& c : cells) v += c.monotonicity_violations;
        return v;
    }
};

namespace detail {

inline std::uint64_t ebn0_key(double ebn0_db) { return std::bit_cast<std::uint64_t>(ebn0_db); }

inline void parallel_for(std::uint64_t count, unsigned workers, const std::function<void(unsigned, std::uint64_t)>& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2) {
        for (std::uint64_t i = 0; i < count; ++i) body(0, i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i; (i = next.fetch_add(1)) < count;) body(w, i);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct PolicyResult {
    TrialOutcome outcome = TrialOutcome::Abandoned;
    std::optional<AbandonReason> reason;
    std::uint64_t q = 0;
    std::optional<double> llr_bits;
};

/// Draws one block for trial `trial` at `ebn0_db` and decodes it under every policy.
inline std::vector<PolicyResult> run_trial(const LinearCode& code, const std::vector<DecodePolicy>& policies,
                                           double ebn0_db, std::uint64_t master_seed, std::uint64_t trial) {
    Rng rng = make_stream(master_seed, ebn0_key(ebn0_db), trial);
    BitBlock message(code.k());
    for (std::size_t i = 0; i < code.k(); ++i)
        if (rng() & 1u) message.set(i, true);
    const BitBlock sent = encode(code, message);
    const ChannelParams params{ebn0_db, code.rate()};
    const SoftObservation obs = transmit(sent, params, rng);

    std::optional<AccountingModel> soft, hard;
    std::vector<PolicyResult> out(policies.size());
    for (std::size_t p = 0; p < policies.size(); ++p) {
        const auto& pol = policies[p];
        const AccountingModel* acc;
        if (pol.order == OrderKind::Hamming) {
            if (!hard) hard = AccountingModel::bsc(code.n(), bsc_crossover(params));
            acc = &*hard;
        } else {
            if (!soft) soft = AccountingModel::from_observation(obs);
            acc = &*soft;
        }
        const DecodeOutcome res = decode(code, obs, pol, *acc);
        auto& r = out[p];
        r.q = queries_used(res);
        if (const auto* d = std::get_if<Decoded>(&res)) {
            r.outcome = d->word == sent ? TrialOutcome::Correct : TrialOutcome::Incorrect;
            r.llr_bits = d->report.llr_bits;
        } else {
            r.outcome = TrialOutcome::Abandoned;
            r.reason = std::get<Abandoned>(res).reason;
        }
    }
    return out;
}

inline bool comparable(const DecodePolicy& a, const DecodePolicy& b) {
    return a.order == b.order && a.max_queries == b.max_queries;
}

inline double tau_or_min(const DecodePolicy& p) { return p.tau ? *p.tau : -std::numeric_limits<double>::infinity(); }

}  // namespace detail

/// Runs every policy over every Eb/N0 point with common random numbers.
inline SweepResult run_sweep(const LinearCode& code, const SweepOptions& opt) {
    if (opt.trials_per_point < 1) throw std::invalid_argument("run_sweep: trials_per_point must be >= 1");
    if (opt.policies.empty()) throw std::invalid_argument("run_sweep: no policies");
    for (const auto& p : opt.policies) p.validate();

    const std::size_t np = opt.policies.size();
    const unsigned workers = std::max(1u, opt.workers);

    // baseline[p]: index of the tau-less comparable policy, or np.
    std::vector<std::size_t> baseline(np, np);
    for (std::size_t p = 0; p < np; ++p) {
        if (!opt.policies[p].tau) continue;
        for (std::size_t b = 0; b < np; ++b)
            if (!opt.policies[b].tau && detail::comparable(opt.policies[b], opt.policies[p])) {
                baseline[p] = b;
                break;
            }
    }

    SweepResult result;
    result.num_policies = np;
    result.ebn0_points = opt.ebn0_points;
    result.cells.resize(np * opt.ebn0_points.size());

    for (std::size_t pt = 0; pt < opt.ebn0_points.size(); ++pt) {
        const double ebn0 = opt.ebn0_points[pt];
        std::vector<std::vector<SweepCell>> partial(workers, std::vector<SweepCell>(np));
        std::vector<std::vector<TrialRecord>> partial_records(workers);

        auto body = [&](unsigned w, std::uint64_t trial) {
            const auto res = detail::run_trial(code, opt.policies, ebn0, opt.master_seed, trial);
            auto& cells = partial[w];
            for (std::size_t p = 0; p < np; ++p) {
                const auto& r = res[p];
                auto& c = cells[p];
                ++c.trials;
                c.total_queries += r.q;
                switch (r.outcome) {
                    case TrialOutcome::Correct: ++c.correct; break;
                    case TrialOutcome::Incorrect: ++c.incorrect; break;
                    case TrialOutcome::Abandoned:
                        ++c.abandoned;
                        if (r.reason == AbandonReason::LlrBelowTau)
                            ++c.abandoned_llr;
                        else
                            ++c.abandoned_cap;
                        break;
                }
                if (baseline[p] < np && r.outcome == TrialOutcome::Abandoned) {
                    const auto base = res[baseline[p]].outcome;
                    if (base == TrialOutcome::Correct) ++c.lost_correct;
                    if (base == TrialOutcome::Incorrect) ++c.converted_errors;
                }
                // A higher threshold may only stop earlier, and may only decode
                // where every lower threshold decoded identically.
                for (std::size_t lo = 0; lo < np; ++lo) {
                    if (lo == p || !detail::comparable(opt.policies[lo], opt.policies[p])) continue;
                    if (!(detail::tau_or_min(opt.policies[lo]) < detail::tau_or_min(opt.policies[p]))) continue;
                    const auto& l = res[lo];
                    const bool decoded = r.outcome != TrialOutcome::Abandoned;
                    if (r.q > l.q || (decoded && (l.outcome != r.outcome || l.q != r.q))) ++c.monotonicity_violations;
                }
                if (opt.keep_records)
                    partial_records[w].push_back(
                        {trial, ebn0, p, r.outcome, r.q, r.llr_bits, r.outcome == TrialOutcome::Correct});
            }
        };

        std::uint64_t done = 0;
        std::uint64_t target = opt.trials_per_point;
        const std::uint64_t cap = opt.trials_per_point * std::max<std::uint64_t>(1, opt.escalate_cap_factor);
        for (;;) {
            const std::uint64_t first = done;
            detail::parallel_for(target - done, workers, [&](unsigned w, std::uint64_t i) { body(w, first + i); });
            done = target;

            bool escalate = false;
            for (std::size_t p = 0; p < np; ++p) {
                if (!opt.policies[p].tau) continue;
                SweepCell c;
                for (const auto& part : partial) c += part[p];
                if (c.abandon_frac() > opt.escalate_abandon_frac && c.nonabandoned() < opt.escalate_min_events)
                    escalate = true;
            }
            if (!escalate || done >= cap) break;
            target = std::min(cap, done * 2);
        }

        for (std::size_t p = 0; p < np; ++p) {
            SweepCell c;
            for (const auto& part : partial) c += part[p];
            c.policy = p;
            c.ebn0_db = ebn0;
            c.has_baseline = baseline[p] < np;
            result.cells[pt * np + p] = c;
        }
        for (auto& recs : partial_records) result.records.insert(result.records.end(), recs.begin(), recs.end());
    }

    if (opt.keep_records) {
        std::vector<std::size_t> point_of(opt.ebn0_points.size());
        auto point_index = [&](double e) {
            return static_cast<std::size_t>(std::find(opt.ebn0_points.begin(), opt.ebn0_points.end(), e) -
                                            opt.ebn0_points.begin());
        };
        std::stable_sort(result.records.begin(), result.records.end(), [&](const TrialRecord& a, const TrialRecord& b) {
            const auto pa = point_index(a.ebn0_db), pb = point_index(b.ebn0_db);
            if (pa != pb) return pa < pb;
            if (a.trial != b.trial) return a.trial < b.trial;
            return a.policy < b.policy;
        });
    }
    return result;
}

struct HistogramBin {
    double log2_lo = 0.0;
    double log2_hi = 0.0;
    std::uint64_t count = 0;
    double density = 0.0;  // count / (samples · bin width), per unit of log2 q
};

struct ErrorQueryDistribution {
    std::vector<std::uint64_t> samples;  // q of each incorrect decoding, in trial order
    std::uint64_t trials = 0;
    double mean = 0.0;
    double error_rate = 0.0;
    std::vector<HistogramBin> histogram;
};

inline std::vector<HistogramBin> log2_histogram(const std::vector<std::uint64_t>& samples, double bin_width) {
    if (samples.empty()) return {};
    const double top = std::log2(static_cast<double>(*std::max_element(samples.begin(), samples.end())));
    const std::size_t bins = static_cast<std::size_t>(std::floor(top / bin_width)) + 1;
    std::vector<HistogramBin> h(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        h[b].log2_lo = static_cast<double>(b) * bin_width;
        h[b].log2_hi = static_cast<double>(b + 1) * bin_width;
    }
    for (auto q : samples) {
        auto b = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(q)) / bin_width));
        ++h[std::min(b, bins - 1)].count;
    }
    for (auto& bin : h)
        bin.density = static_cast<double>(bin.count) / (static_cast<double>(samples.size()) * bin_width);
    return h;
}

/// Kolmogorov-Smirnov distance between the empirical CDF of positive integer
/// samples and the Geometric(p) CDF 1 - (1 - p)^q.
inline double ks_distance_geometric(std::vector<std::uint64_t> samples, double p) {
    if (samples.empty()) throw std::invalid_argument("ks_distance_geometric: no samples");
    std::sort(samples.begin(), samples.end());
    const double nn = static_cast<double>(samples.size());
    const double log_miss = std::log1p(-p);
    auto cdf = [&](std::uint64_t q) { return -std::expm1(static_cast<double>(q) * log_miss); };
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size();) {
        const std::uint64_t v = samples[i];
        std::size_t j = i;
        while (j < samples.size() && samples[j] == v) ++j;
        // just below v, and at v
        d = std::max(d, std::fabs(static_cast<double>(i) / nn - cdf(v - 1)));
        d = std::max(d, std::fabs(static_cast<double>(j) / nn - cdf(v)));
        i = j;
    }
    return d;
}

/// Query counts at incorrect decodings (tau-less decoding), gathered until
/// `target_errors` have been seen.
inline ErrorQueryDistribution collect_error_query_distribution(const LinearCode& code, double ebn0_db,
                                                               std::uint64_t target_errors, std::uint64_t seed,
                                                               unsigned workers = 1,
                                                               OrderKind order = OrderKind::LogisticRank,
                                                               double bin_width = 0.25) {
    if (target_errors < 1) throw std::invalid_argument("collect_error_query_distribution: target_errors must be >= 1");
    constexpr double min_error_rate = 1e-4;
    constexpr std::uint64_t guard_trials = 10000;
    constexpr std::uint64_t batch = 512;

    const std::vector<DecodePolicy> policy{{std::nullopt, default_max_queries(code), order}};
    ErrorQueryDistribution dist;
    std::vector<std::uint64_t> q_of(batch);
    while (dist.samples.size() < target_errors) {
        const std::uint64_t first = dist.trials;
        detail::parallel_for(batch, workers, [&](unsigned, std::uint64_t i) {
            const auto r = detail::run_trial(code, policy, ebn0_db, seed, first + i);
            q_of[i] = r[0].outcome == TrialOutcome::Incorrect ? r[0].q : 0;
        });
        for (std::uint64_t i = 0; i < batch && dist.samples.size() < target_errors; ++i) {
            ++dist.trials;
            if (q_of[i]) dist.samples.push_back(q_of[i]);
        }
        const double rate = static_cast<double>(dist.samples.size()) / static_cast<double>(dist.trials);
        if (dist.trials >= guard_trials && rate < min_error_rate)
            throw GuardError("collect_error_query_distribution: error rate " + std::to_string(rate) + " after " +
                             std::to_string(dist.trials) + " trials at Eb/N0 " + std::to_string(ebn0_db) +
                             " dB is below 1e-4; choose a noisier operating point");
    }
    double sum = 0.0;
    for (auto q : dist.samples) sum += static_cast<double>(q);
    dist.mean = sum / static_cast<double>(dist.samples.size());
    dist.error_rate = static_cast<double>(dist.samples.size()) / static_cast<double>(dist.trials);
    dist.histogram = log2_histogram(dist.samples, bin_width);
    return dist;
}

/// Exhaustive verification of the confidence accounting on a small code.
struct ExactAccounting {
    std::vector<double> p_correct_direct;   // sum of direct products over the first q patterns
    std::vector<double> p_correct_ledger;   // exp of the ledger's running log-sum
    std::vector<double> p_incorrect_exact;  // actual codebook, exhaustive over true noise
    std::vector<double> p_incorrect_approx; // model P(U <= q), geometric by default
    double max_ledger_deviation = 0.0;
    double max_incorrect_deviation = 0.0;
};

inline ExactAccounting oracle_exact_accounting(const LinearCode& code, const SoftObservation& obs,
                                               OrderKind order = OrderKind::LogisticRank,
                                               std::optional<IncorrectModel> model = std::nullopt) {
    constexpr std::size_t max_n = 12;
    if (code.n() > max_n) throw std::invalid_argument("oracle_exact_accounting: n must be <= 12");
    if (obs.size() != code.n()) throw std::invalid_argument("oracle_exact_accounting: observation length differs from n");
    const std::size_t n = code.n();
    const std::size_t total = std::size_t{1} << n;

    PatternGenerator gen = order == OrderKind::LogisticRank ? PatternGenerator(order, n, obs.ranks)
                                                            : PatternGenerator(order, n);
    std::vector<std::uint32_t> mask_at(total);  // pattern mask at query index
    std::vector<std::size_t> index_of(total, total);
    const auto acc = AccountingModel::from_observation(obs);
    ConfidenceLedger ledger(code.redundancy());

    ExactAccounting out;
    out.p_correct_direct.reserve(total);
    double running = 0.0;
    for (std::size_t q = 0; q < total; ++q) {
        if (!gen.advance()) throw std::logic_error("oracle_exact_accounting: generator ended early");
        std::uint32_t mask = 0;
        for (auto i : gen.positions()) mask |= 1u << i;
        if (index_of[mask] != total) throw std::logic_error("oracle_exact_accounting: pattern repeated");
        mask_at[q] = mask;
        index_of[mask] = q;

        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) prob *= (mask >> i) & 1u ? obs.flip_prob[i] : 1.0 - obs.flip_prob[i];
        running += prob;
        out.p_correct_direct.push_back(running);

        ledger.record_query(acc.pattern_log_prob(gen.positions()));
        out.p_correct_ledger.push_back(std::exp(ledger.cum_correct_log()));
        out.max_ledger_deviation =
            std::max(out.max_ledger_deviation, std::fabs(out.p_correct_ledger.back() - running));
    }

    // With true noise e, query z hits an erroneous code-word iff z != e and
    // z ^ e is a nonzero code-word, i.e. the syndromes match.
    auto syndrome_of = [&](std::uint32_t mask) {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1u) s ^= code.column(i);
        return s;
    };
    std::vector<std::vector<std::size_t>> first_two(std::size_t{1} << code.redundancy());
    for (std::size_t q = 0; q < total; ++q) {
        auto& v = first_two[syndrome_of(mask_at[q])];
        if (v.size() < 2) v.push_back(q);
    }
    std::vector<double> mass_at(total + 1, 0.0);  // P(U = q+1), index total = never
    for (std::uint32_t e = 0; e < total; ++e) {
        double prob = 1.0;
        for (std::size_t i = 0; i < n; ++i) prob *= (e >> i) & 1u ? obs.flip_prob[i] : 1.0 - obs.flip_prob[i];
        const auto& v = first_two[syndrome_of(e)];
        std::size_t u = total;
        for (auto q : v)
            if (mask_at[q] != e) {
                u = q;
                break;
            }
        mass_at[u] += prob;
    }
    const IncorrectModel approx = model.value_or(IncorrectModel::geometric(code.redundancy()));
    running = 0.0;
    for (std::size_t q = 0; q < total; ++q) {
        running += mass_at[q];
        out.p_incorrect_exact.push_back(running);
        out.p_incorrect_approx.push_back(std::exp(approx.log_cum(q + 1)));
        out.max_incorrect_deviation =
            std::max(out.max_incorrect_deviation, std::fabs(running - out.p_incorrect_approx.back()));
    }
    return out;
}

}  // namespace grand

#endif  // GRAND_HARNESS_HPP
