#include "pdmp/state.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pdmp {

ProductMetric::ProductMetric(double regime_gap) : gap_(regime_gap) {
  if (!(regime_gap > 0.0) || !std::isfinite(regime_gap)) {
    throw std::invalid_argument("ProductMetric: regime gap must be positive");
  }
}

WeightedMeasure::WeightedMeasure(std::vector<Atom> atoms) {
  atoms_.reserve(atoms.size());
  for (const Atom& a : atoms) add(a.x, a.weight);
}

void WeightedMeasure::accumulate(double w) noexcept {
  const double t = sum_ + w;
  compensation_ += (std::abs(sum_) >= std::abs(w)) ? (sum_ - t) + w
                                                   : (w - t) + sum_;
  sum_ = t;
}

void WeightedMeasure::add(const StatePoint& x, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("WeightedMeasure: weights must be finite and >= 0");
  }
  if (!std::isfinite(x.y)) {
    throw std::invalid_argument("WeightedMeasure: atom location is not finite");
  }
  atoms_.push_back({x, weight});
  accumulate(weight);
}

void WeightedMeasure::append(const WeightedMeasure& other) {
  atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  accumulate(other.sum_);
  accumulate(other.compensation_);
}

double WeightedMeasure::regime_mass(std::size_t i) const {
  double m = 0.0;
  for (const Atom& a : atoms_) {
    if (a.x.regime == i) m += a.weight;
  }
  return m;
}

std::size_t WeightedMeasure::max_regime() const {
  std::size_t r = 0;
  for (const Atom& a : atoms_) r = std::max(r, a.x.regime);
  return r;
}

WeightedMeasure normalize(const WeightedMeasure& mu) {
  const double mass = mu.total_mass();
  if (!(mass > 0.0)) {
    throw std::invalid_argument("normalize: measure has zero total mass");
  }
  std::vector<Atom> atoms = mu.atoms();
  for (Atom& a : atoms) a.weight /= mass;
  return WeightedMeasure(std::move(atoms));
}

WeightedMeasure merge(std::span<const WeightedMeasure> parts) {
  WeightedMeasure out;
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  out.reserve(n);
  for (const auto& p : parts) out.append(p);
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_measure_csv(std::ostream& out, const WeightedMeasure& mu) {
  out << "y,i,weight\n";
  for (const Atom& a : mu.atoms()) {
    out << format_double(a.x.y) << ',' << a.x.regime << ','
        << format_double(a.weight) << '\n';
  }
}

WeightedMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "y,i,weight") {
    throw std::runtime_error("measure CSV: missing header 'y,i,weight'");
  }
  WeightedMeasure mu;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string y, i, w;
    if (!std::getline(fields, y, ',') || !std::getline(fields, i, ',') ||
        !std::getline(fields, w)) {
      throw std::runtime_error("measure CSV: malformed row " + std::to_string(row));
    }
    mu.add({std::stod(y), static_cast<std::size_t>(std::stoul(i))}, std::stod(w));
  }
  return mu;
}

}  // namespace pdmp
