#ifndef MEMEBOT_EVAL_KAPPA_HPP
#define MEMEBOT_EVAL_KAPPA_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "memebot/error.hpp"

namespace memebot {

struct KappaResult {
  double p_o = 0.0;
  double p_e = 0.0;
  double kappa = 0.0;
  std::size_t n = 0;
  bool degenerate = false;  // p_e == 1: both raters constant on the same label; kappa reported as 1
};

/// Cohen's kappa over paired labels: kappa = (p_o - p_e) / (1 - p_e).
template <class Label>
KappaResult cohen_kappa(const std::vector<std::pair<Label, Label>>& pairs) {
  if (pairs.empty()) throw Error(Errc::EmptyInput, "kappa needs at least one labeled item");
  KappaResult res;
  res.n = pairs.size();
  std::map<Label, std::size_t> a_counts;
  std::map<Label, std::size_t> b_counts;
  std::size_t agree = 0;
  for (const auto& [a, b] : pairs) {
    ++a_counts[a];
    ++b_counts[b];
    if (a == b) ++agree;
  }
  const double n = static_cast<double>(res.n);
  res.p_o = static_cast<double>(agree) / n;
  for (const auto& [label, ca] : a_counts) {
    if (auto it = b_counts.find(label); it != b_counts.end()) {
      res.p_e += (static_cast<double>(ca) / n) * (static_cast<double>(it->second) / n);
    }
  }
  if (res.p_e >= 1.0) {
    res.p_e = 1.0;
    res.degenerate = true;
    res.kappa = 1.0;
    return res;
  }
  res.kappa = (res.p_o - res.p_e) / (1.0 - res.p_e);
  return res;
}

}  // namespace memebot

#endif  // MEMEBOT_EVAL_KAPPA_HPP
