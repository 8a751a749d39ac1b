#ifndef CONCEPTFUSE_PIPELINE_HPP
#define CONCEPTFUSE_PIPELINE_HPP

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "conceptfuse/alignment.hpp"
#include "conceptfuse/clustering.hpp"
#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/evaluation.hpp"
#include "conceptfuse/fusion.hpp"
#include "conceptfuse/ingest.hpp"
#include "conceptfuse/retrieval.hpp"

namespace cfuse {

// Single-medium dictionaries (scores are the raw lambdas), used for the
// partial-retrieval feedback loop and the text/image baseline runs.
inline std::vector<FusedCase> partial_corpus(const Corpus& corpus, Medium medium) {
  std::vector<FusedCase> out;
  out.reserve(corpus.cases.size());
  for (const auto& c : corpus.cases) {
    FusedCase fc;
    fc.case_id = c.case_id;
    const auto& idx = medium == Medium::Text ? c.text_index : c.image_index;
    auto prov = medium == Medium::Text ? Provenance::TextOnly : Provenance::ImageOnly;
    for (const auto& wc : idx.concepts) fc.entries[wc.cui] = {wc.lambda, prov};
    out.push_back(std::move(fc));
  }
  return out;
}

inline std::vector<RankedList> run_all_queries(const SearchIndex& index,
                                               const std::vector<FusedCase>& queries,
                                               std::size_t k, SimilarityKind kind) {
  std::vector<RankedList> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(index.query(q, k, kind));
  return out;
}

// Interpolated precision of a single-medium run at one recall level,
// averaged over evaluable queries.
inline double partial_rp(const Corpus& corpus, const Corpus& queries, const Qrels& qrels,
                         Medium medium, double recall_level, SimilarityKind kind) {
  SearchIndex index(partial_corpus(corpus, medium));
  auto lists = run_all_queries(index, partial_corpus(queries, medium), index.size(), kind);
  auto pr = interpolated_pr(lists, qrels, {recall_level});
  return pr.front().second;
}

struct AutoAlignment {
  AlignmentParams params;
  AlphaPair alphas;
};

// The feedback loop: run each medium alone, read interpolated precision at
// the recall level, and balance the media weights by the resulting ratio.
inline AutoAlignment auto_align(const Corpus& corpus, const Corpus& queries, const Qrels& qrels,
                                double recall_level = 0.30,
                                SimilarityKind kind = SimilarityKind::Fsf) {
  AutoAlignment out;
  out.params.recall_level = recall_level;
  out.params.avg_txt = medium_average(corpus, Medium::Text);
  out.params.avg_img = medium_average(corpus, Medium::Image);
  out.params.rp_txt = partial_rp(corpus, queries, qrels, Medium::Text, recall_level, kind);
  out.params.rp_img = partial_rp(corpus, queries, qrels, Medium::Image, recall_level, kind);
  out.alphas = compute_alpha(out.params);
  return out;
}

struct FusedPipeline {
  std::vector<FusedCase> corpus;
  std::vector<FusedCase> queries;
  std::size_t clamped_corpus = 0;
  std::size_t clamped_queries = 0;
};

// Align both corpora with the corpus-level constants, then fuse.
inline FusedPipeline align_and_fuse(const Corpus& corpus, const Corpus& queries,
                                    const AlphaPair& alphas, FusionOperator op) {
  FusedPipeline out;
  auto ac = apply_alignment(corpus, alphas.alpha_txt, alphas.alpha_img);
  auto aq = apply_alignment(queries, alphas.alpha_txt, alphas.alpha_img);
  out.clamped_corpus = ac.clamped;
  out.clamped_queries = aq.clamped;
  out.corpus = fuse_corpus(ac.corpus, op);
  out.queries = fuse_corpus(aq.corpus, op);
  return out;
}

struct QueryRunStats {
  std::vector<RankedList> lists;
  double mean_time_ms = 0.0;
  double mean_candidates = 0.0;
};

// Execute all queries, exhaustively or through the box model when given.
inline QueryRunStats timed_queries(const SearchIndex& index,
                                   const std::vector<FusedCase>& queries, std::size_t k,
                                   SimilarityKind kind, const Pruner* pruner = nullptr) {
  QueryRunStats out;
  double total_ms = 0.0;
  double total_candidates = 0.0;
  for (const auto& q : queries) {
    auto t0 = std::chrono::steady_clock::now();
    if (pruner) {
      auto docs = pruner->candidates(q);
      total_candidates += static_cast<double>(docs.size());
      out.lists.push_back(index.query_subset(q, docs, k, kind));
    } else {
      total_candidates += static_cast<double>(index.size());
      out.lists.push_back(index.query(q, k, kind));
    }
    auto t1 = std::chrono::steady_clock::now();
    total_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  if (!queries.empty()) {
    out.mean_time_ms = total_ms / static_cast<double>(queries.size());
    out.mean_candidates = total_candidates / static_cast<double>(queries.size());
  }
  return out;
}

}  // namespace cfuse

#endif
