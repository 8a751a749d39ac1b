#ifndef CONCEPTFUSE_RETRIEVAL_HPP
#define CONCEPTFUSE_RETRIEVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conceptfuse/clustering.hpp"
#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/errors.hpp"

namespace cfuse {

enum class SimilarityKind { Cosine, Dice, Jaccard, Vsm, Fsf };

inline constexpr SimilarityKind kAllSimilarities[] = {
    SimilarityKind::Cosine, SimilarityKind::Dice, SimilarityKind::Jaccard,
    SimilarityKind::Vsm, SimilarityKind::Fsf,
};

inline const char* similarity_name(SimilarityKind k) {
  switch (k) {
    case SimilarityKind::Cosine: return "cosine";
    case SimilarityKind::Dice: return "dice";
    case SimilarityKind::Jaccard: return "jaccard";
    case SimilarityKind::Vsm: return "vsm";
    default: return "fsf";
  }
}

inline SimilarityKind parse_similarity(std::string_view name) {
  for (auto k : kAllSimilarities)
    if (name == similarity_name(k)) return k;
  throw DomainError("unknown similarity '" + std::string(name) + "'");
}

// Sparse non-negative score vector, sorted by concept id.
using ScoreVec = std::vector<std::pair<ConceptId, double>>;

inline ScoreVec to_scores(const FusedCase& fc) {
  ScoreVec v;
  v.reserve(fc.entries.size());
  for (const auto& [cui, e] : fc.entries) {
    if (!(e.score >= 0.0)) throw DomainError("negative score for " + cui.value);
    v.emplace_back(cui, e.score);
  }
  return v;
}

namespace detail {

struct PairStats {
  double dot = 0.0;       // sum of products over shared ids
  double max_sum = 0.0;   // sum of max over shared ids
  double q2 = 0.0;
  double d2 = 0.0;
};

inline PairStats pair_stats(const ScoreVec& q, const ScoreVec& d) {
  PairStats s;
  auto qi = q.begin();
  auto di = d.begin();
  while (qi != q.end() && di != d.end()) {
    if (qi->first < di->first) {
      s.q2 += qi->second * qi->second;
      ++qi;
    } else if (di->first < qi->first) {
      s.d2 += di->second * di->second;
      ++di;
    } else {
      s.dot += qi->second * di->second;
      s.max_sum += std::max(qi->second, di->second);
      s.q2 += qi->second * qi->second;
      s.d2 += di->second * di->second;
      ++qi;
      ++di;
    }
  }
  for (; qi != q.end(); ++qi) s.q2 += qi->second * qi->second;
  for (; di != d.end(); ++di) s.d2 += di->second * di->second;
  return s;
}

inline double score_from_stats(SimilarityKind kind, const PairStats& s) {
  switch (kind) {
    case SimilarityKind::Cosine: {
      double den = std::sqrt(s.q2) * std::sqrt(s.d2);
      return den > 0.0 ? s.dot / den : 0.0;
    }
    case SimilarityKind::Dice: {
      double den = s.q2 + s.d2;
      return den > 0.0 ? 2.0 * s.dot / den : 0.0;
    }
    case SimilarityKind::Jaccard: {
      double den = s.q2 + s.d2 - s.dot;
      return den > 0.0 ? s.dot / den : 0.0;
    }
    case SimilarityKind::Vsm:
      return s.dot;
    default:
      return s.max_sum;  // optimistic union over shared concepts
  }
}

}  // namespace detail

inline double similarity(SimilarityKind kind, const ScoreVec& q, const ScoreVec& d) {
  for (const auto& [cui, v] : q)
    if (!(v >= 0.0)) throw DomainError("negative coordinate for " + cui.value);
  for (const auto& [cui, v] : d)
    if (!(v >= 0.0)) throw DomainError("negative coordinate for " + cui.value);
  return detail::score_from_stats(kind, detail::pair_stats(q, d));
}

inline double similarity(SimilarityKind kind, const FusedCase& q, const FusedCase& d) {
  return similarity(kind, to_scores(q), to_scores(d));
}

struct RankedList {
  std::string query_id;
  std::vector<std::pair<std::string, double>> hits;  // non-increasing, ties by id
};

// Immutable scoring index over a fused corpus.
class SearchIndex {
 public:
  explicit SearchIndex(const std::vector<FusedCase>& fused) {
    ids_.reserve(fused.size());
    vecs_.reserve(fused.size());
    for (const auto& fc : fused) {
      by_id_.emplace(fc.case_id, ids_.size());
      ids_.push_back(fc.case_id);
      vecs_.push_back(to_scores(fc));
    }
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  bool contains(const std::string& case_id) const { return by_id_.count(case_id) != 0; }

  RankedList query(const FusedCase& q, std::size_t k, SimilarityKind kind,
                   bool keep_zero = true) const {
    std::vector<std::size_t> all(ids_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return query_subset(q, all, k, kind, keep_zero);
  }

  RankedList query_subset(const FusedCase& q, const std::vector<std::size_t>& docs,
                          std::size_t k, SimilarityKind kind, bool keep_zero = true) const {
    if (k < 1) throw DomainError("k must be >= 1");
    ScoreVec qv = to_scores(q);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(docs.size());
    for (std::size_t i : docs) {
      double s = detail::score_from_stats(kind, detail::pair_stats(qv, vecs_[i]));
      if (keep_zero || s > 0.0) scored.emplace_back(s, i);
    }
    std::sort(scored.begin(), scored.end(), [this](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return ids_[a.second] < ids_[b.second];
    });
    if (scored.size() > k) scored.resize(k);
    RankedList out;
    out.query_id = q.case_id;
    out.hits.reserve(scored.size());
    for (const auto& [s, i] : scored) out.hits.emplace_back(ids_[i], s);
    return out;
  }

  std::size_t position_of(const std::string& case_id) const {
    auto it = by_id_.find(case_id);
    if (it == by_id_.end()) throw ConsistencyError("unknown case id: " + case_id);
    return it->second;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<ScoreVec> vecs_;
  std::map<std::string, std::size_t> by_id_;
};

inline RankedList knn_query(const std::vector<FusedCase>& index, const FusedCase& query,
                            std::size_t k, SimilarityKind kind, bool keep_zero = true) {
  return SearchIndex(index).query(query, k, kind, keep_zero);
}

// Candidate selection through the box model; scores on the surviving set are
// exactly the exhaustive scores.
class Pruner {
 public:
  Pruner(const BoxModel& model, const SearchIndex& index) : model_(model), index_(index) {
    std::set<std::string> model_ids;
    for (const auto& box : model.boxes)
      for (const auto& m : box.members)
        model_ids.insert(m);
    if (model_ids.size() != index.size())
      throw ConsistencyError("model and index cover different case sets");
    for (const auto& id : index.ids())
      if (!model_ids.count(id))
        throw ConsistencyError("index case missing from model: " + id);
  }

  std::vector<std::size_t> candidates(const FusedCase& q) const {
    SparseVec qv = to_sparse_vec(q, model_.vocabulary);
    std::vector<std::size_t> docs;
    for (const auto& rb : relevant_boxes(model_, qv))
      for (const auto& m : model_.boxes[rb.index].members)
        docs.push_back(index_.position_of(m));
    std::sort(docs.begin(), docs.end());
    docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
    return docs;
  }

  RankedList query(const FusedCase& q, std::size_t k, SimilarityKind kind,
                   bool keep_zero = true) const {
    return index_.query_subset(q, candidates(q), k, kind, keep_zero);
  }

 private:
  const BoxModel& model_;
  const SearchIndex& index_;
};

inline RankedList pruned_query(const BoxModel& model, const std::vector<FusedCase>& index,
                               const FusedCase& query, std::size_t k, SimilarityKind kind,
                               bool keep_zero = true) {
  SearchIndex si(index);
  return Pruner(model, si).query(query, k, kind, keep_zero);
}

// Pack ranked lists into TREC run rows.
inline RunFile make_run(const std::vector<RankedList>& lists, const std::string& tag) {
  RunFile run;
  for (const auto& rl : lists) {
    int rank = 0;
    for (const auto& [case_id, score] : rl.hits)
      run.rows.push_back({rl.query_id, case_id, ++rank, score, tag});
  }
  return run;
}

}  // namespace cfuse

#endif
