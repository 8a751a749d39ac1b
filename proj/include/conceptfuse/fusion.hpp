#ifndef CONCEPTFUSE_FUSION_HPP
#define CONCEPTFUSE_FUSION_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/errors.hpp"
#include "conceptfuse/ingest.hpp"

namespace cfuse {

// Pointwise [0,1]^2 -> [0,1] combination of the two media weights.
enum class FusionOperator {
  Max,          // max(x,y)
  BoundedSum,   // min(1, x+y)
  Min,          // min(x,y)
  Lukasiewicz,  // max(0, x+y-1)
  Mean,         // (x+y)/2
  SymSumZero,   // xy / (1 - x - y + 2xy), inputs clamped off the corners
};

inline constexpr FusionOperator kAllFusionOperators[] = {
    FusionOperator::Max,        FusionOperator::BoundedSum, FusionOperator::Min,
    FusionOperator::Lukasiewicz, FusionOperator::Mean,       FusionOperator::SymSumZero,
};

inline const char* operator_name(FusionOperator op) {
  switch (op) {
    case FusionOperator::Max: return "max";
    case FusionOperator::BoundedSum: return "bounded-sum";
    case FusionOperator::Min: return "min";
    case FusionOperator::Lukasiewicz: return "lukasiewicz";
    case FusionOperator::Mean: return "mean";
    default: return "symsum0";
  }
}

inline const char* operator_formula(FusionOperator op) {
  switch (op) {
    case FusionOperator::Max: return "max(x,y)";
    case FusionOperator::BoundedSum: return "min(1,x+y)";
    case FusionOperator::Min: return "min(x,y)";
    case FusionOperator::Lukasiewicz: return "max(0,x+y-1)";
    case FusionOperator::Mean: return "(x+y)/2";
    default: return "xy/(1-x-y+2xy)";
  }
}

inline FusionOperator parse_operator(std::string_view name) {
  for (auto op : kAllFusionOperators)
    if (name == operator_name(op)) return op;
  throw DomainError("unknown fusion operator '" + std::string(name) + "'");
}

inline double apply_operator(FusionOperator op, double x, double y) {
  detail::check_unit(x, "x");
  detail::check_unit(y, "y");
  switch (op) {
    case FusionOperator::Max:
      return std::max(x, y);
    case FusionOperator::BoundedSum:
      return std::min(1.0, x + y);
    case FusionOperator::Min:
      return std::min(x, y);
    case FusionOperator::Lukasiewicz:
      // max(0, x+y-1) never exceeds min(x, y); the extra min repairs the
      // one-ulp rounding of x + y - 1 so the ordering holds in binary too
      return std::max(0.0, std::min(x + y - 1.0, std::min(x, y)));
    case FusionOperator::Mean:
      return (x + y) / 2.0;
    default: {
      // keep away from the (0,1)/(1,0) singularity
      constexpr double eps = 1e-6;
      double a = std::clamp(x, eps, 1.0 - eps);
      double b = std::clamp(y, eps, 1.0 - eps);
      // grouped as (a+b) and (a*b) so the expression is symmetric in binary
      return a * b / (1.0 - (a + b) + 2.0 * (a * b));
    }
  }
}

// Combine the two media indexes of one (aligned) elementary case into a
// sparse dictionary. Concepts present in both media get the operator value
// with provenance Fused; single-medium concepts pass through unchanged.
inline FusedCase fuse_case(const ElementaryCase& c, FusionOperator op) {
  FusedCase out;
  out.case_id = c.case_id;
  for (const auto& wc : c.text_index.concepts) {
    detail::check_unit(wc.lambda, "text lambda");
    out.entries[wc.cui] = {wc.lambda, Provenance::TextOnly};
  }
  for (const auto& wc : c.image_index.concepts) {
    detail::check_unit(wc.lambda, "image lambda");
    auto it = out.entries.find(wc.cui);
    if (it == out.entries.end()) {
      out.entries[wc.cui] = {wc.lambda, Provenance::ImageOnly};
    } else {
      it->second.score = apply_operator(op, it->second.score, wc.lambda);
      it->second.provenance = Provenance::Fused;
    }
  }
  return out;
}

inline std::vector<FusedCase> fuse_corpus(const Corpus& corpus, FusionOperator op) {
  std::vector<FusedCase> out;
  out.reserve(corpus.cases.size());
  for (const auto& c : corpus.cases) out.push_back(fuse_case(c, op));
  return out;
}

// --- fused dictionary files --------------------------------------------------
//
// One case per line: <case_id> <cui>:<score>:<t|i|f> ...

inline std::string render_fused(const std::vector<FusedCase>& fused) {
  std::string out;
  for (const auto& fc : fused) {
    out += fc.case_id;
    for (const auto& [cui, e] : fc.entries) {
      out += ' ';
      out += cui.value;
      out += ':';
      out += detail::format_number(e.score);
      out += ':';
      out += provenance_code(e.provenance);
    }
    out += '\n';
  }
  return out;
}

inline void write_fused(const std::vector<FusedCase>& fused, const std::filesystem::path& path) {
  detail::atomic_write(path, render_fused(fused));
}

inline std::vector<FusedCase> parse_fused(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  const std::string pstr = path.string();
  std::vector<FusedCase> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    FusedCase fc;
    fc.case_id = std::string(toks[0]);
    for (std::size_t t = 1; t < toks.size(); ++t) {
      auto parts = detail::split_char(toks[t], ':');
      if (parts.size() != 3)
        throw ParseError(pstr, lineno, "bad fused token '" + std::string(toks[t]) + "'");
      std::string cui(parts[0]);
      if (!ConceptId::is_valid(cui)) throw ParseError(pstr, lineno, "bad CUI '" + cui + "'");
      FusedEntry e;
      e.score = detail::parse_number(parts[1], pstr, lineno);
      if (!(e.score >= 0.0))
        throw DomainError(pstr + ":" + std::to_string(lineno) + ": negative score");
      if (parts[2] == "t") e.provenance = Provenance::TextOnly;
      else if (parts[2] == "i") e.provenance = Provenance::ImageOnly;
      else if (parts[2] == "f") e.provenance = Provenance::Fused;
      else throw ParseError(pstr, lineno, "bad provenance '" + std::string(parts[2]) + "'");
      fc.entries[ConceptId(cui)] = e;
    }
    out.push_back(std::move(fc));
  }
  return out;
}

}  // namespace cfuse

#endif
