#pragma once

// Time-to-trigger survival curves.
//
// Each trial contributes one observation per bug: the first time the bug
// reached Triggered (an event) or the campaign horizon (censored). The
// Kaplan–Meier product is kept as an exact integer fraction as well as a
// double, so that with no censoring the estimate is bit-identical to the
// empirical fraction and the median threshold S(t) <= 1/2 is an exact
// integer comparison. Confidence intervals use Greenwood's variance on the
// log(-log S) scale, clamped to [1,1] at S=1 and [0,0] at S=0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace frb {

inline constexpr double kZ95 = 1.959963984540054; // two-sided 95% normal quantile

struct SurvivalObservation {
    double time_s = 0;
    bool event = false; // true: bug triggered at time_s; false: censored
};

struct KmPoint {
    double time_s = 0;
    int at_risk = 0;
    int events = 0;
    uint64_t surv_num = 1; // S(t) as exact fraction, reduced
    uint64_t surv_den = 1;
    double survival = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
};

struct SurvivalCurve {
    std::vector<KmPoint> points; // one per distinct event time, ascending
    int total = 0;
    int events = 0;
};

inline SurvivalCurve km_curve(std::vector<SurvivalObservation> obs) {
    SurvivalCurve curve;
    curve.total = int(obs.size());
    std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) {
        if (a.time_s != b.time_s) return a.time_s < b.time_s;
        return a.event > b.event; // events before censorings at equal times
    });
    uint64_t num = 1, den = 1;
    double greenwood = 0.0;
    int at_risk = curve.total;
    size_t i = 0;
    while (i < obs.size()) {
        double t = obs[i].time_s;
        int d = 0, c = 0;
        while (i < obs.size() && obs[i].time_s == t) {
            (obs[i].event ? d : c)++;
            i++;
        }
        if (d > 0) {
            curve.events += d;
            // S *= (n - d) / n, reduced so the integers stay small.
            num *= uint64_t(at_risk - d);
            den *= uint64_t(at_risk);
            if (uint64_t g = std::gcd(num, den); g > 1) num /= g, den /= g;
            if (at_risk > d) greenwood += double(d) / (double(at_risk) * double(at_risk - d));

            KmPoint p;
            p.time_s = t;
            p.at_risk = at_risk;
            p.events = d;
            p.surv_num = num;
            p.surv_den = den;
            p.survival = double(num) / double(den);
            if (num == den) {
                p.ci_low = p.ci_high = 1.0;
            } else if (num == 0) {
                p.ci_low = p.ci_high = 0.0;
            } else {
                double log_s = std::log(p.survival);
                double se = std::sqrt(greenwood) / std::abs(log_s);
                double theta = std::log(-log_s);
                p.ci_low = std::exp(-std::exp(theta + kZ95 * se));
                p.ci_high = std::exp(-std::exp(theta - kZ95 * se));
            }
            curve.points.push_back(p);
        }
        at_risk -= d + c;
    }
    return curve;
}

// Survival probability at time t (right-continuous step function).
inline double survival_at(const SurvivalCurve& curve, double t) {
    double s = 1.0;
    for (const auto& p : curve.points) {
        if (p.time_s > t) break;
        s = p.survival;
    }
    return s;
}

// Smallest event time with S(t) <= 1/2, decided on the exact fraction.
inline std::optional<double> median_time(const SurvivalCurve& curve) {
    for (const auto& p : curve.points)
        if (2 * p.surv_num <= p.surv_den) return p.time_s;
    return std::nullopt;
}

// Fraction of trials whose bug triggered within the horizon, exact.
struct TriggerFraction {
    int triggered = 0;
    int total = 0;
    double value() const { return total == 0 ? 0.0 : double(triggered) / double(total); }
};

// Floor-rendered HH:MM, e.g. 780 s -> "00:13". Seconds are truncated.
inline std::string format_hhmm(double seconds) {
    auto total_min = uint64_t(seconds < 0 ? 0 : seconds) / 60;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02llu:%02llu",
                  static_cast<unsigned long long>(total_min / 60),
                  static_cast<unsigned long long>(total_min % 60));
    return buf;
}

inline std::string format_median(const std::optional<double>& median) {
    return median ? format_hhmm(*median) : "--";
}

} // namespace frb
