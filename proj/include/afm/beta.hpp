// Copyright 2026 the afm authors. Apache 2.0 license.
//
// Incremental-stability gain functions beta(C, t): increasing in the
// initial deviation C, decaying in elapsed time t. Exponential and
// power-law families have closed-form tails; sampled tables carry a
// declared geometric majorant beyond their horizon so infinite tails stay
// certifiable.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "afm/errors.hpp"

namespace afm {

class BetaFunction {
 public:
  enum class Form { exponential, power, tabulated };

  // beta(C, t) = scale * C * rate^t.
  static BetaFunction exponential(double scale, double rate) {
    if (!(scale >= 0.0)) throw InvalidArgument("BetaFunction: scale must be >= 0");
    if (!(rate >= 0.0 && rate < 1.0)) {
      throw InvalidArgument("BetaFunction: exponential rate must lie in [0, 1)");
    }
    BetaFunction b;
    b.form_ = Form::exponential;
    b.scale_ = scale;
    b.rate_ = rate;
    return b;
  }

  // beta(C, t) = scale * C * t^{-alpha} for t >= 1, and scale * C at t = 0
  // (the t = 0 value is pinned by convention; summable only for alpha > 1).
  static BetaFunction power(double scale, double alpha) {
    if (!(scale >= 0.0)) throw InvalidArgument("BetaFunction: scale must be >= 0");
    if (!(alpha > 0.0)) throw InvalidArgument("BetaFunction: power alpha must be > 0");
    BetaFunction b;
    b.form_ = Form::power;
    b.scale_ = scale;
    b.alpha_ = alpha;
    return b;
  }

  // Sampled table: values[bin][tau] for deviation bins c_bins (ascending,
  // positive). Queries interpolate linearly in C (through the origin below
  // the first bin) and decay geometrically at majorant_rate beyond the
  // tabulated horizon.
  static BetaFunction tabulated(std::vector<double> c_bins,
                                std::vector<std::vector<double>> values, double majorant_rate) {
    if (c_bins.empty() || values.size() != c_bins.size()) {
      throw InvalidArgument("BetaFunction: bins/values shape mismatch");
    }
    double prev = 0.0;
    for (double c : c_bins) {
      if (!(c > prev)) throw InvalidArgument("BetaFunction: bins must be ascending positive");
      prev = c;
    }
    std::size_t horizon = values.front().size();
    if (horizon == 0) throw InvalidArgument("BetaFunction: empty table");
    for (const auto& row : values) {
      if (row.size() != horizon) throw InvalidArgument("BetaFunction: ragged table");
      for (std::size_t tau = 0; tau < row.size(); ++tau) {
        if (!(row[tau] >= 0.0)) throw InvalidArgument("BetaFunction: negative table entry");
        if (tau > 0 && row[tau] > row[tau - 1] * (1.0 + 1e-12)) {
          throw InvalidArgument("BetaFunction: table must be nonincreasing in t");
        }
      }
    }
    if (!(majorant_rate >= 0.0 && majorant_rate < 1.0)) {
      throw InvalidArgument("BetaFunction: majorant rate must lie in [0, 1)");
    }
    BetaFunction b;
    b.form_ = Form::tabulated;
    b.c_bins_ = std::move(c_bins);
    b.values_ = std::move(values);
    b.rate_ = majorant_rate;
    return b;
  }

  Form form() const { return form_; }
  double rate() const { return rate_; }
  double scale() const { return scale_; }
  double alpha() const { return alpha_; }
  long table_horizon() const {
    return form_ == Form::tabulated ? static_cast<long>(values_.front().size()) - 1 : -1;
  }

  double operator()(double C, long t) const {
    if (!(C >= 0.0)) throw InvalidArgument("BetaFunction: C must be >= 0");
    if (t < 0) throw InvalidArgument("BetaFunction: t must be >= 0");
    if (C == 0.0) return 0.0;
    switch (form_) {
      case Form::exponential:
        return scale_ * C * pow_rate(t);
      case Form::power:
        return t == 0 ? scale_ * C : scale_ * C * std::pow(static_cast<double>(t), -alpha_);
      case Form::tabulated: {
        long h = table_horizon();
        if (t <= h) return interp_c(C, static_cast<std::size_t>(t));
        double at_h = interp_c(C, static_cast<std::size_t>(h));
        return rate_ == 0.0 ? 0.0 : at_h * std::pow(rate_, static_cast<double>(t - h));
      }
    }
    return 0.0;
  }

  bool summable() const {
    switch (form_) {
      case Form::exponential:
        return true;
      case Form::power:
        return alpha_ > 1.0;
      case Form::tabulated:
        return true;
    }
    return false;
  }

  // Upper bound on the infinite tail sum_{k >= m} beta(C, k).
  double tail_sum(double C, long m) const {
    if (!(C >= 0.0)) throw InvalidArgument("BetaFunction: C must be >= 0");
    if (m < 0) throw InvalidArgument("BetaFunction: m must be >= 0");
    if (C == 0.0) return 0.0;
    switch (form_) {
      case Form::exponential: {
        if (rate_ == 0.0) return m == 0 ? scale_ * C : 0.0;
        return scale_ * C * std::pow(rate_, static_cast<double>(m)) / (1.0 - rate_);
      }
      case Form::power: {
        if (!(alpha_ > 1.0)) return std::numeric_limits<double>::infinity();
        double sum = (m == 0) ? scale_ * C : 0.0;
        long lo = std::max(m, 1L);
        long K = lo + 4096;
        for (long k = lo; k <= K; ++k) {
          sum += scale_ * C * std::pow(static_cast<double>(k), -alpha_);
        }
        // Integral remainder: sum_{k > K} k^{-a} <= K^{1-a} / (a-1).
        sum += scale_ * C * std::pow(static_cast<double>(K), 1.0 - alpha_) / (alpha_ - 1.0);
        return sum;
      }
      case Form::tabulated: {
        long h = table_horizon();
        double sum = 0.0;
        for (long k = m; k <= h; ++k) sum += interp_c(C, static_cast<std::size_t>(k));
        double at_h = interp_c(C, static_cast<std::size_t>(h));
        if (rate_ > 0.0) {
          long start = std::max(m, h + 1);
          sum += at_h * std::pow(rate_, static_cast<double>(start - h)) / (1.0 - rate_);
        }
        return sum;
      }
    }
    return 0.0;
  }

  // Partial sum sum_{s=0}^{t-1} beta(C, s); the full series when t < 0.
  double prefix_sum(double C, long t) const {
    if (!(C >= 0.0)) throw InvalidArgument("BetaFunction: C must be >= 0");
    if (C == 0.0) return 0.0;
    if (t < 0) {
      if (!summable()) throw InvalidArgument("BetaFunction: series not summable");
      return tail_sum(C, 0);
    }
    if (form_ == Form::exponential) {
      if (rate_ == 0.0) return t >= 1 ? scale_ * C : 0.0;
      return scale_ * C * (1.0 - std::pow(rate_, static_cast<double>(t))) / (1.0 - rate_);
    }
    double sum = 0.0;
    for (long s = 0; s < t; ++s) sum += (*this)(C, s);
    return sum;
  }

 private:
  double pow_rate(long t) const {
    if (rate_ == 0.0) return t == 0 ? 1.0 : 0.0;
    return std::pow(rate_, static_cast<double>(t));
  }

  double interp_c(double C, std::size_t tau) const {
    // Linear in C: through the origin below the first bin, between bins
    // inside the table, proportional continuation above the last bin.
    const auto& bins = c_bins_;
    if (C <= bins.front()) return values_.front()[tau] * (C / bins.front());
    for (std::size_t i = 1; i < bins.size(); ++i) {
      if (C <= bins[i]) {
        double lo = values_[i - 1][tau], hi = values_[i][tau];
        double frac = (C - bins[i - 1]) / (bins[i] - bins[i - 1]);
        return lo + frac * (hi - lo);
      }
    }
    return values_.back()[tau] * (C / bins.back());
  }

  Form form_ = Form::exponential;
  double scale_ = 1.0;
  double rate_ = 0.0;
  double alpha_ = 1.0;
  std::vector<double> c_bins_;
  std::vector<std::vector<double>> values_;
};

inline void to_json(nlohmann::json& j, const BetaFunction& b) {
  switch (b.form()) {
    case BetaFunction::Form::exponential:
      j = nlohmann::json{{"form", "exponential"}, {"scale", b.scale()}, {"rate", b.rate()}};
      break;
    case BetaFunction::Form::power:
      j = nlohmann::json{{"form", "power"}, {"scale", b.scale()}, {"alpha", b.alpha()}};
      break;
    case BetaFunction::Form::tabulated:
      j = nlohmann::json{{"form", "tabulated"},
                         {"horizon", b.table_horizon()},
                         {"majorant_rate", b.rate()}};
      break;
  }
}

}  // namespace afm
