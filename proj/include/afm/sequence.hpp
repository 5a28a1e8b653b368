// Copyright 2026 the afm authors. Apache 2.0 license.
//
// One-sided real sequences over a finite stored horizon with the implicit
// convention value(s) = 0 for s < 0 and s beyond the stored range, plus the
// shift / windowing operator algebra built on that convention.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "afm/errors.hpp"

namespace afm {

class Sequence {
 public:
  Sequence() = default;

  explicit Sequence(std::vector<double> values) : v_(std::move(values)) {
    for (double x : v_) {
      if (!std::isfinite(x)) throw NonFinite("Sequence: entries must be finite");
    }
  }

  static Sequence zeros(int length) {
    if (length < 0) throw InvalidArgument("Sequence::zeros: negative length");
    return Sequence(std::vector<double>(static_cast<std::size_t>(length), 0.0));
  }

  static Sequence constant(int length, double value) {
    if (length < 0) throw InvalidArgument("Sequence::constant: negative length");
    return Sequence(std::vector<double>(static_cast<std::size_t>(length), value));
  }

  int length() const { return static_cast<int>(v_.size()); }
  // Largest stored index T; -1 for the empty sequence.
  int horizon() const { return static_cast<int>(v_.size()) - 1; }
  bool empty() const { return v_.empty(); }

  // Zero-extended access: defined for every integer index.
  double value(long s) const {
    if (s < 0 || s >= static_cast<long>(v_.size())) return 0.0;
    return v_[static_cast<std::size_t>(s)];
  }
  double operator[](long s) const { return value(s); }

  double sup_norm() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

  const std::vector<double>& data() const { return v_; }

  bool operator==(const Sequence& other) const { return v_ == other.v_; }

 private:
  std::vector<double> v_;
};

struct InputBall {
  double R;

  explicit InputBall(double radius) : R(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw InvalidArgument("InputBall: R must be a positive finite real");
    }
  }

  bool contains(const Sequence& u) const { return u.sup_norm() <= R; }
};

// (R^k u)_t = u_{t-k} for t >= k, 0 otherwise. Horizon grows by k.
inline Sequence right_shift(const Sequence& u, int k) {
  if (k < 0) throw InvalidArgument("right_shift: k must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(u.length() + k), 0.0);
  for (int t = 0; t < u.length(); ++t) out[static_cast<std::size_t>(t + k)] = u.value(t);
  return Sequence(std::move(out));
}

// (L^k u)_t = u_{t+k}. Horizon shrinks by k; empty when k exceeds it.
inline Sequence left_shift(const Sequence& u, int k) {
  if (k < 0) throw InvalidArgument("left_shift: k must be nonnegative");
  int len = std::max(0, u.length() - k);
  std::vector<double> out(static_cast<std::size_t>(len));
  for (int t = 0; t < len; ++t) out[static_cast<std::size_t>(t)] = u.value(t + k);
  return Sequence(std::move(out));
}

// (W_{t,m} u)_s = u_s for max(t-m,0) <= s <= t, 0 otherwise; horizon is t.
inline Sequence window(const Sequence& u, int t, int m) {
  if (t < 0) throw InvalidArgument("window: t must be nonnegative");
  if (m < 0) throw InvalidArgument("window: m must be nonnegative");
  std::vector<double> out(static_cast<std::size_t>(t) + 1, 0.0);
  int lo = std::max(t - m, 0);
  for (int s = lo; s <= t; ++s) out[static_cast<std::size_t>(s)] = u.value(s);
  return Sequence(std::move(out));
}

// A vector x in R^{t+1} viewed as an input supported on [0, t].
inline Sequence embed_vector(const std::vector<double>& x) {
  if (x.empty()) throw InvalidArgument("embed_vector: empty vector has no time index");
  return Sequence(x);
}

inline void to_json(nlohmann::json& j, const Sequence& u) { j = u.data(); }

inline void from_json(const nlohmann::json& j, Sequence& u) {
  u = Sequence(j.get<std::vector<double>>());
}

inline std::string to_csv(const Sequence& u) {
  std::ostringstream out;
  out.precision(17);
  for (double x : u.data()) out << x << '\n';
  return out.str();
}

inline Sequence sequence_from_csv(std::istream& in) {
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw InvalidArgument("sequence_from_csv: bad line '" + line + "'");
    }
    v.push_back(x);
  }
  return Sequence(std::move(v));
}

inline void save_sequence_csv(const Sequence& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("save_sequence_csv: cannot open " + path);
  out << to_csv(u);
}

inline Sequence load_sequence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_sequence_csv: cannot open " + path);
  return sequence_from_csv(in);
}

}  // namespace afm
