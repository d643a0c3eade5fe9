#ifndef GRAND_IO_HPP
#define GRAND_IO_HPP

// CSV and JSON output. Layouts are documented in docs/formats.md; keep the
// two in sync.

#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "grand/harness.hpp"
#include "json.hpp"

namespace grand {

inline constexpr const char* version = "0.1.0";

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trippable-enough text for a double; NaN becomes "NA".
inline std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline std::string format_tau(const std::optional<double>& tau) { return tau ? format_number(*tau) : "none"; }

inline void write_metadata(std::ostream& os, const Metadata& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
}

inline const char* sweep_csv_header() {
    return "policy,decoder,tau,ebn0_db,trials,correct,incorrect,abandoned,abandoned_llr,abandoned_cap,"
           "bler,bler_ci_half,bler_cond,bler_cond_ci_half,success,success_cond,success_cond_ci_half,"
           "success_cond_se,abandon_frac,abandon_ci_half,nonabandon_frac,avg_queries_to_decision,"
           "avg_queries_per_success,lost_correct,converted_errors,monotonicity_violations";
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& res, const std::vector<DecodePolicy>& policies,
                            const Metadata& meta) {
    write_metadata(os, meta);
    os << sweep_csv_header() << '\n';
    for (std::size_t pol = 0; pol < res.num_policies; ++pol) {
        for (std::size_t pt = 0; pt < res.ebn0_points.size(); ++pt) {
            const auto& c = res.cell(pol, pt);
            const auto& p = policies[pol];
            const auto f = format_number;
            os << pol << ',' << (p.order == OrderKind::Hamming ? "grand" : "orbgrand") << ',' << format_tau(p.tau)
               << ',' << f(c.ebn0_db) << ',' << c.trials << ',' << c.correct << ',' << c.incorrect << ','
               << c.abandoned << ',' << c.abandoned_llr << ',' << c.abandoned_cap << ',' << f(c.bler()) << ','
               << f(c.bler_ci().half_width()) << ',' << f(c.bler_cond()) << ',' << f(c.bler_cond_ci().half_width())
               << ',' << f(c.success()) << ',' << f(c.success_cond()) << ',' << f(c.success_cond_ci().half_width())
               << ',' << f(c.success_cond_se()) << ',' << f(c.abandon_frac()) << ','
               << f(c.abandon_ci().half_width()) << ',' << f(c.nonabandon_frac()) << ','
               << f(c.avg_queries_to_decision()) << ',' << f(c.avg_queries_per_success()) << ',' << c.lost_correct
               << ',' << c.converted_errors << ',' << c.monotonicity_violations << '\n';
        }
    }
}

inline void write_trial_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << "policy,ebn0_db,trial,q,llr_bits,outcome\n";
    for (const auto& r : records)
        os << r.policy << ',' << format_number(r.ebn0_db) << ',' << r.trial << ',' << r.q << ','
           << (r.llr_bits ? format_number(*r.llr_bits) : "NA") << ',' << to_string(r.outcome) << '\n';
}

/// Histogram of log2 q at incorrect decodings next to the geometric model.
inline void write_histogram_csv(std::ostream& os, const ErrorQueryDistribution& dist, std::size_t redundancy,
                                const Metadata& meta) {
    write_metadata(os, meta);
    os << "log2_q_lo,log2_q_hi,count,density,geometric_density,mean,samples\n";
    const double log_miss = std::log1p(-std::ldexp(1.0, -static_cast<int>(redundancy)));
    auto cdf_below = [&](double log2_q) {  // P(Q < 2^log2_q), Q ~ Geometric
        const double q = std::ceil(std::exp2(log2_q)) - 1.0;
        return q <= 0.0 ? 0.0 : -std::expm1(q * log_miss);
    };
    for (const auto& b : dist.histogram) {
        const double width = b.log2_hi - b.log2_lo;
        const double geo = (cdf_below(b.log2_hi) - cdf_below(b.log2_lo)) / width;
        os << format_number(b.log2_lo) << ',' << format_number(b.log2_hi) << ',' << b.count << ','
           << format_number(b.density) << ',' << format_number(geo) << ',' << format_number(dist.mean) << ','
           << dist.samples.size() << '\n';
    }
}

inline nlohmann::json to_json(const DecodePolicy& p) {
    nlohmann::json j;
    j["decoder"] = p.order == OrderKind::Hamming ? "grand" : "orbgrand";
    j["tau"] = p.tau ? nlohmann::json(*p.tau) : nlohmann::json(nullptr);
    j["max_queries"] = p.max_queries;
    return j;
}

}  // namespace grand

#endif  // GRAND_IO_HPP
