#ifndef CONCEPTFUSE_EVALUATION_HPP
#define CONCEPTFUSE_EVALUATION_HPP

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "conceptfuse/errors.hpp"
#include "conceptfuse/ingest.hpp"
#include "conceptfuse/retrieval.hpp"

namespace cfuse {

inline std::vector<double> default_levels() {
  std::vector<double> v;
  for (int i = 0; i <= 10; ++i) v.push_back(i / 10.0);
  return v;
}

// Group run rows into ranked lists, one per query, in file order.
inline std::vector<RankedList> group_run(const RunFile& run) {
  std::vector<RankedList> lists;
  std::map<std::string, std::size_t> pos;
  for (const auto& r : run.rows) {
    auto [it, inserted] = pos.try_emplace(r.query_id, lists.size());
    if (inserted) lists.push_back({r.query_id, {}});
    lists[it->second].hits.emplace_back(r.case_id, r.score);
  }
  return lists;
}

// Uninterpolated average precision at full run depth; unretrieved relevant
// documents contribute zero.
inline double average_precision(const RankedList& run, const Qrels& qrels,
                                const std::string& query_id) {
  int total_rel = qrels.total_relevant(query_id);
  if (total_rel < 1)
    throw EvaluationError("no relevant judgments for query " + query_id);
  int seen_rel = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < run.hits.size(); ++r) {
    if (qrels.relevance(query_id, run.hits[r].first) > 0) {
      ++seen_rel;
      sum += static_cast<double>(seen_rel) / static_cast<double>(r + 1);
    }
  }
  return sum / total_rel;
}

// Mean over evaluable queries; queries without relevant judgments are
// skipped (trec_eval convention), collected into *skipped when given.
inline double mean_average_precision(const std::vector<RankedList>& runs, const Qrels& qrels,
                                     std::vector<std::string>* skipped = nullptr) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& rl : runs) {
    if (qrels.total_relevant(rl.query_id) < 1) {
      if (skipped) skipped->push_back(rl.query_id);
      continue;
    }
    sum += average_precision(rl, qrels, rl.query_id);
    ++n;
  }
  if (n == 0) throw EvaluationError("no evaluable queries");
  return sum / static_cast<double>(n);
}

// Standard interpolation: precision at level l is the best precision at any
// cutoff whose recall reaches l; 0 where the recall level is unreachable.
inline std::vector<std::pair<double, double>> interpolated_pr(
    const RankedList& run, const Qrels& qrels, const std::vector<double>& levels) {
  int total_rel = qrels.total_relevant(run.query_id);
  if (total_rel < 1)
    throw EvaluationError("no relevant judgments for query " + run.query_id);
  // best precision at or beyond each cutoff's recall, scanned back to front
  std::vector<std::pair<double, double>> recall_prec;  // (recall, max precision from here on)
  {
    std::vector<std::pair<double, double>> points;
    int rel = 0;
    for (std::size_t r = 0; r < run.hits.size(); ++r) {
      if (qrels.relevance(run.query_id, run.hits[r].first) > 0) ++rel;
      points.emplace_back(static_cast<double>(rel) / total_rel,
                          static_cast<double>(rel) / static_cast<double>(r + 1));
    }
    double best = 0.0;
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
      best = std::max(best, it->second);
      recall_prec.emplace_back(it->first, best);
    }
    std::reverse(recall_prec.begin(), recall_prec.end());
  }
  std::vector<std::pair<double, double>> out;
  for (double level : levels) {
    double p = 0.0;
    // first cutoff whose recall reaches the level already carries the max
    for (const auto& [recall, prec] : recall_prec) {
      if (recall >= level - 1e-12) {
        p = prec;
        break;
      }
    }
    out.emplace_back(level, p);
  }
  return out;
}

// Averaged over evaluable queries.
inline std::vector<std::pair<double, double>> interpolated_pr(
    const std::vector<RankedList>& runs, const Qrels& qrels, const std::vector<double>& levels) {
  std::vector<double> sums(levels.size(), 0.0);
  std::size_t n = 0;
  for (const auto& rl : runs) {
    if (qrels.total_relevant(rl.query_id) < 1) continue;
    auto pr = interpolated_pr(rl, qrels, levels);
    for (std::size_t i = 0; i < levels.size(); ++i) sums[i] += pr[i].second;
    ++n;
  }
  if (n == 0) throw EvaluationError("no evaluable queries");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < levels.size(); ++i)
    out.emplace_back(levels[i], sums[i] / static_cast<double>(n));
  return out;
}

inline double r_precision(const RankedList& run, const Qrels& qrels,
                          const std::string& query_id) {
  int total_rel = qrels.total_relevant(query_id);
  if (total_rel < 1)
    throw EvaluationError("no relevant judgments for query " + query_id);
  int rel = 0;
  std::size_t cutoff = std::min<std::size_t>(run.hits.size(), total_rel);
  for (std::size_t r = 0; r < cutoff; ++r)
    if (qrels.relevance(query_id, run.hits[r].first) > 0) ++rel;
  return static_cast<double>(rel) / total_rel;
}

struct EvalReport {
  std::map<std::string, double> per_query_ap;
  double map = 0.0;
  std::vector<std::pair<double, double>> interpolated;
  double r_precision = 0.0;  // mean over evaluable queries
  std::vector<std::string> skipped_queries;
};

inline EvalReport evaluate(const std::vector<RankedList>& runs, const Qrels& qrels,
                           const std::vector<double>& levels = default_levels()) {
  EvalReport rep;
  double ap_sum = 0.0, rp_sum = 0.0;
  std::size_t n = 0;
  for (const auto& rl : runs) {
    if (qrels.total_relevant(rl.query_id) < 1) {
      rep.skipped_queries.push_back(rl.query_id);
      continue;
    }
    double ap = average_precision(rl, qrels, rl.query_id);
    rep.per_query_ap[rl.query_id] = ap;
    ap_sum += ap;
    rp_sum += r_precision(rl, qrels, rl.query_id);
    ++n;
  }
  if (n == 0) throw EvaluationError("no evaluable queries");
  rep.map = ap_sum / static_cast<double>(n);
  rep.r_precision = rp_sum / static_cast<double>(n);
  rep.interpolated = interpolated_pr(runs, qrels, levels);
  return rep;
}

// Machine-readable lines: <metric> <query id or 'all'> <value to 6 decimals>.
inline std::string render_report_lines(const EvalReport& rep) {
  std::string out;
  for (const auto& [qid, ap] : rep.per_query_ap)
    out += "ap " + qid + " " + detail::format_fixed6(ap) + "\n";
  out += "map all " + detail::format_fixed6(rep.map) + "\n";
  out += "rprec all " + detail::format_fixed6(rep.r_precision) + "\n";
  for (const auto& [level, prec] : rep.interpolated) {
    char name[32];
    std::snprintf(name, sizeof name, "iprec_at_%.2f", level);
    out += std::string(name) + " all " + detail::format_fixed6(prec) + "\n";
  }
  return out;
}

inline std::string render_report_table(const EvalReport& rep) {
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-18s %10.4f  (%.2f%%)\n", "MAP", rep.map, rep.map * 100.0);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-18s %10.4f  (%.2f%%)\n", "R-prec", rep.r_precision,
                rep.r_precision * 100.0);
  out += buf;
  for (const auto& [level, prec] : rep.interpolated) {
    std::snprintf(buf, sizeof buf, "iprec@%-11.2f %10.4f\n", level, prec);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-18s %10zu\n", "queries", rep.per_query_ap.size());
  out += buf;
  if (!rep.skipped_queries.empty()) {
    std::snprintf(buf, sizeof buf, "%-18s %10zu\n", "skipped", rep.skipped_queries.size());
    out += buf;
  }
  return out;
}

}  // namespace cfuse

#endif
