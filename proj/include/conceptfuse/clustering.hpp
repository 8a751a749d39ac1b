#ifndef CONCEPTFUSE_CLUSTERING_HPP
#define CONCEPTFUSE_CLUSTERING_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/errors.hpp"
#include "conceptfuse/ingest.hpp"

namespace cfuse {

// Sparse point over the fused vocabulary; absent dimensions are 0.
// Entries are sorted by dimension index.
using SparseVec = std::vector<std::pair<std::uint32_t, double>>;

struct BoxDim {
  std::uint32_t dim = 0;
  double lo = 0.0;  // per-dimension minimum over members
  double hi = 0.0;  // per-dimension maximum over members
};

// Axis-aligned hyper-box with fuzzy membership ramp of width eta.
struct HyperBox {
  std::vector<BoxDim> dims;  // sorted by dim; dimensions absent here are [0,0]
  double eta = 0.01;
  std::vector<std::string> members;

  // caches over dims (maintained by train / refreshed after edits)
  double sum_hi = 0.0;   // expanded-extent baseline for a point with no support here
  double base_s = 0.0;   // sum of per-dim contributions for such a point

  const BoxDim* find(std::uint32_t d) const {
    auto it = std::lower_bound(dims.begin(), dims.end(), d,
                               [](const BoxDim& b, std::uint32_t v) { return b.dim < v; });
    return it != dims.end() && it->dim == d ? &*it : nullptr;
  }
};

namespace detail {

// Three-branch ramp of the membership function.
inline double ramp(double x, double eta) {
  if (x <= 0.0) return 0.0;
  if (x > eta) return 1.0;
  return x / eta;
}

inline void refresh_box_caches(HyperBox& box) {
  box.sum_hi = 0.0;
  box.base_s = 0.0;
  for (const auto& d : box.dims) {
    box.sum_hi += d.hi;
    box.base_s += 1.0 - ramp(d.lo, box.eta);
  }
}

// Eta per the minimum nonzero per-dimension range over the box members.
inline double box_sensitivity(const HyperBox& box, double fallback) {
  const std::size_t n_members = box.members.size();
  if (n_members < 2) return fallback;
  double best = -1.0;
  for (const auto& d : box.dims) {
    double range = d.hi - d.lo;
    if (range > 0.0 && (best < 0.0 || range < best)) best = range;
  }
  if (best < 0.0) return fallback;
  return best / (2.0 * static_cast<double>(n_members - 1));
}

}  // namespace detail

// Sensitivity of a point set: minimum nonzero per-dimension spread divided
// by 2(N-1). Degenerate sets (N < 2 or all ranges zero) return the fallback.
inline double sensitivity(const std::vector<SparseVec>& points, double fallback) {
  if (points.empty()) throw DomainError("sensitivity: empty point set");
  if (!(fallback > 0.0)) throw DomainError("sensitivity: fallback must be positive");
  const std::size_t n = points.size();
  if (n < 2) return fallback;
  std::map<std::uint32_t, std::pair<double, std::size_t>> stat;  // dim -> (max, count)
  std::map<std::uint32_t, double> minv;
  for (const auto& p : points) {
    for (const auto& [d, v] : p) {
      auto [it, inserted] = stat.try_emplace(d, std::pair{v, std::size_t{1}});
      if (!inserted) {
        it->second.first = std::max(it->second.first, v);
        ++it->second.second;
      }
      auto [mit, minserted] = minv.try_emplace(d, v);
      if (!minserted) mit->second = std::min(mit->second, v);
    }
  }
  double best = -1.0;
  for (const auto& [d, mc] : stat) {
    // a dimension missing from some point has minimum 0 there
    double lo = mc.second == n ? minv[d] : 0.0;
    double range = mc.first - lo;
    if (range > 0.0 && (best < 0.0 || range < best)) best = range;
  }
  if (best < 0.0) return fallback;
  return best / (2.0 * static_cast<double>(n - 1));
}

// Membership degree of x in the box over an n-dimensional space. Dimensions
// absent from both sides contribute 1 to the sum.
inline double membership(const HyperBox& box, const SparseVec& x, std::size_t n) {
  double s = box.base_s;
  std::size_t extra = 0;  // x dims outside the box support
  for (const auto& [d, v] : x) {
    detail::check_unit(v, "coordinate");
    if (const BoxDim* bd = box.find(d)) {
      double contrib = 1.0 - detail::ramp(v - bd->hi, box.eta) - detail::ramp(bd->lo - v, box.eta);
      s += contrib - (1.0 - detail::ramp(bd->lo, box.eta));
    } else {
      s += 1.0 - detail::ramp(v, box.eta);
      ++extra;
    }
  }
  std::size_t m = box.dims.size() + extra;
  if (m > n) throw DomainError("membership: more explicit dimensions than n");
  double h = (static_cast<double>(n - m) + s) / static_cast<double>(n);
  return std::clamp(h, 0.0, 1.0);
}

// Expanded-extent test: absorbing x must keep the total extent within n*theta.
inline bool can_expand(const HyperBox& box, const SparseVec& x, double theta, std::size_t n) {
  double extent = box.sum_hi;
  for (const auto& [d, v] : x) {
    if (const BoxDim* bd = box.find(d))
      extent += std::max(bd->hi, v) - std::min(bd->lo, v) - bd->hi;
    else
      extent += v;
  }
  return extent <= static_cast<double>(n) * theta;
}

struct BoxModel {
  std::vector<HyperBox> boxes;
  double theta = 1.0;
  std::size_t n = 0;  // dimensionality = fused vocabulary size at training
  double eta_fallback = 0.01;
  std::vector<std::string> presentation_order;
  std::vector<ConceptId> vocabulary;  // dim index -> cui

  std::uint32_t dim_of(const ConceptId& cui) const {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), cui);
    if (it == vocabulary.end() || *it != cui) return UINT32_MAX;
    return static_cast<std::uint32_t>(it - vocabulary.begin());
  }
};

// Map a fused dictionary onto the model/vocabulary dimension space.
// Concepts outside the vocabulary are dropped (they cannot match any box).
inline SparseVec to_sparse_vec(const FusedCase& fc, const std::vector<ConceptId>& vocabulary) {
  SparseVec v;
  v.reserve(fc.entries.size());
  for (const auto& [cui, e] : fc.entries) {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), cui);
    if (it == vocabulary.end() || *it != cui) continue;
    v.emplace_back(static_cast<std::uint32_t>(it - vocabulary.begin()), e.score);
  }
  return v;
}

namespace detail {

inline void absorb(HyperBox& box, const SparseVec& x, const std::string& case_id,
                   double eta_fallback) {
  // implicit coordinates are 0, so every box dimension outside x drops lo to 0
  std::vector<BoxDim> merged;
  merged.reserve(box.dims.size() + x.size());
  auto bi = box.dims.begin();
  auto xi = x.begin();
  while (bi != box.dims.end() || xi != x.end()) {
    if (xi == x.end() || (bi != box.dims.end() && bi->dim < xi->first)) {
      merged.push_back({bi->dim, 0.0, bi->hi});
      ++bi;
    } else if (bi == box.dims.end() || xi->first < bi->dim) {
      merged.push_back({xi->first, 0.0, xi->second});
      ++xi;
    } else {
      merged.push_back({bi->dim, std::min(bi->lo, xi->second), std::max(bi->hi, xi->second)});
      ++bi;
      ++xi;
    }
  }
  box.dims = std::move(merged);
  box.members.push_back(case_id);
  box.eta = box_sensitivity(box, eta_fallback);
  refresh_box_caches(box);
}

}  // namespace detail

// Expansion-only fuzzy min-max training. Deterministic for a fixed input
// order: each point goes to the highest-membership box that can still expand
// (ties to the lower box index); otherwise it seeds a new degenerate box.
inline BoxModel train(const std::vector<FusedCase>& fused, double theta, double eta_fallback) {
  if (fused.empty()) throw DomainError("train: empty input");
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("train: theta must be in (0,1]");
  if (!(eta_fallback > 0.0)) throw DomainError("train: eta fallback must be positive");

  BoxModel model;
  model.theta = theta;
  model.eta_fallback = eta_fallback;
  std::set<ConceptId> vocab;
  for (const auto& fc : fused)
    for (const auto& [cui, e] : fc.entries) vocab.insert(cui);
  model.vocabulary.assign(vocab.begin(), vocab.end());
  model.n = model.vocabulary.size();

  std::vector<std::pair<double, std::size_t>> order;  // (-membership, box index)
  for (const auto& fc : fused) {
    model.presentation_order.push_back(fc.case_id);
    SparseVec x = to_sparse_vec(fc, model.vocabulary);

    bool absorbed = false;
    if (!model.boxes.empty()) {
      order.clear();
      for (std::size_t b = 0; b < model.boxes.size(); ++b)
        order.emplace_back(-membership(model.boxes[b], x, model.n), b);
      std::sort(order.begin(), order.end());
      for (const auto& [neg_h, b] : order) {
        if (can_expand(model.boxes[b], x, theta, model.n)) {
          detail::absorb(model.boxes[b], x, fc.case_id, eta_fallback);
          absorbed = true;
          break;
        }
      }
    }
    if (!absorbed) {
      HyperBox box;
      box.dims.reserve(x.size());
      for (const auto& [d, v] : x) box.dims.push_back({d, v, v});
      box.eta = eta_fallback;
      box.members.push_back(fc.case_id);
      detail::refresh_box_caches(box);
      model.boxes.push_back(std::move(box));
    }
  }
  return model;
}

struct RelevantBox {
  std::size_t index = 0;
  double membership = 0.0;
};

// Positive fuzzy evidence on the query's own support. The raw H > 0 rule is
// vacuous in a sparse space (absent dimensions keep H strictly positive), so
// relevance instead requires some query dimension to contribute.
inline double support_evidence(const HyperBox& box, const SparseVec& x) {
  double s = 0.0;
  for (const auto& [d, v] : x) {
    if (const BoxDim* bd = box.find(d))
      s += 1.0 - detail::ramp(v - bd->hi, box.eta) - detail::ramp(bd->lo - v, box.eta);
    else
      s += 1.0 - detail::ramp(v, box.eta);
  }
  return s;
}

// Boxes worth scanning for this query, descending by membership degree.
inline std::vector<RelevantBox> relevant_boxes(const BoxModel& model, const SparseVec& query) {
  std::vector<RelevantBox> out;
  for (std::size_t b = 0; b < model.boxes.size(); ++b) {
    if (support_evidence(model.boxes[b], query) > 0.0)
      out.push_back({b, membership(model.boxes[b], query, model.n)});
  }
  std::stable_sort(out.begin(), out.end(), [](const RelevantBox& a, const RelevantBox& b) {
    return a.membership > b.membership;
  });
  return out;
}

// --- model files -------------------------------------------------------------
//
//   model <theta> <n> <eta_fallback>
//   vocab <cui> ...
//   order <case_id> ...
//   box <eta> | <member ...> | v <cui>:<val> ... | u <cui>:<val> ...
//
// v lists only positive minima, u only positive maxima; a dimension with a
// zero maximum is indistinguishable from an absent one and is not stored.

inline std::string render_model(const BoxModel& model) {
  std::string out = "model " + detail::format_number(model.theta) + " " +
                    std::to_string(model.n) + " " +
                    detail::format_number(model.eta_fallback) + "\n";
  out += "vocab";
  for (const auto& cui : model.vocabulary) {
    out += ' ';
    out += cui.value;
  }
  out += "\norder";
  for (const auto& id : model.presentation_order) {
    out += ' ';
    out += id;
  }
  out += '\n';
  for (const auto& box : model.boxes) {
    out += "box " + detail::format_number(box.eta) + " |";
    for (const auto& m : box.members) {
      out += ' ';
      out += m;
    }
    out += " | v";
    for (const auto& d : box.dims)
      if (d.lo > 0.0)
        out += ' ' + model.vocabulary[d.dim].value + ':' + detail::format_number(d.lo);
    out += " | u";
    for (const auto& d : box.dims)
      if (d.hi > 0.0)
        out += ' ' + model.vocabulary[d.dim].value + ':' + detail::format_number(d.hi);
    out += '\n';
  }
  return out;
}

inline void write_model(const BoxModel& model, const std::filesystem::path& path) {
  detail::atomic_write(path, render_model(model));
}

inline BoxModel parse_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  const std::string pstr = path.string();
  BoxModel model;
  std::string line;
  std::size_t lineno = 0;

  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) throw ParseError(pstr, lineno + 1, std::string("missing ") + what);
    ++lineno;
  };

  next_line("model header");
  {
    auto toks = detail::split_ws(line);
    if (toks.size() != 4 || toks[0] != "model")
      throw ParseError(pstr, lineno, "expected 'model <theta> <n> <eta_fallback>'");
    model.theta = detail::parse_number(toks[1], pstr, lineno);
    model.n = static_cast<std::size_t>(detail::parse_int(toks[2], pstr, lineno));
    model.eta_fallback = detail::parse_number(toks[3], pstr, lineno);
  }
  next_line("vocab line");
  {
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0] != "vocab") throw ParseError(pstr, lineno, "expected 'vocab ...'");
    for (std::size_t i = 1; i < toks.size(); ++i)
      model.vocabulary.emplace_back(std::string(toks[i]));
  }
  next_line("order line");
  {
    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0] != "order") throw ParseError(pstr, lineno, "expected 'order ...'");
    for (std::size_t i = 1; i < toks.size(); ++i)
      model.presentation_order.emplace_back(std::string(toks[i]));
  }
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] != "box") throw ParseError(pstr, lineno, "expected 'box ...'");
    HyperBox box;
    std::size_t t = 1;
    if (t >= toks.size()) throw ParseError(pstr, lineno, "missing eta");
    box.eta = detail::parse_number(toks[t++], pstr, lineno);
    auto expect_sep = [&] {
      if (t >= toks.size() || toks[t] != "|") throw ParseError(pstr, lineno, "expected '|'");
      ++t;
    };
    expect_sep();
    while (t < toks.size() && toks[t] != "|") box.members.emplace_back(std::string(toks[t++]));
    expect_sep();
    if (t >= toks.size() || toks[t] != "v") throw ParseError(pstr, lineno, "expected 'v'");
    ++t;
    std::map<std::uint32_t, std::pair<double, double>> dims;  // dim -> (lo, hi)
    auto read_entries = [&](bool is_lo) {
      while (t < toks.size() && toks[t] != "|") {
        auto parts = detail::split_char(toks[t], ':');
        if (parts.size() != 2)
          throw ParseError(pstr, lineno, "bad box entry '" + std::string(toks[t]) + "'");
        ConceptId cui{std::string(parts[0])};
        std::uint32_t d = model.dim_of(cui);
        if (d == UINT32_MAX) throw ParseError(pstr, lineno, "cui not in vocab: " + cui.value);
        double val = detail::parse_number(parts[1], pstr, lineno);
        auto& e = dims[d];
        (is_lo ? e.first : e.second) = val;
        ++t;
      }
    };
    read_entries(true);
    expect_sep();
    if (t >= toks.size() || toks[t] != "u") throw ParseError(pstr, lineno, "expected 'u'");
    ++t;
    read_entries(false);
    for (const auto& [d, lohi] : dims) {
      if (lohi.first > lohi.second)
        throw ParseError(pstr, lineno, "box minimum above maximum");
      box.dims.push_back({d, lohi.first, lohi.second});
    }
    detail::refresh_box_caches(box);
    model.boxes.push_back(std::move(box));
  }
  return model;
}

}  // namespace cfuse

#endif
