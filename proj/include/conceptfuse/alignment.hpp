#ifndef CONCEPTFUSE_ALIGNMENT_HPP
#define CONCEPTFUSE_ALIGNMENT_HPP

#include <algorithm>
#include <cstddef>

#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/errors.hpp"
#include "conceptfuse/ingest.hpp"

namespace cfuse {

// Corpus-level inputs for the media balancing step. The rp values are
// interpolated precisions of the text-only / image-only runs at recall_level.
struct AlignmentParams {
  double avg_txt = 0.0;
  double avg_img = 0.0;
  double rp_txt = 0.0;
  double rp_img = 0.0;
  double recall_level = 0.30;
};

struct AlphaPair {
  double alpha_txt = 1.0;
  double alpha_img = 1.0;
};

// Arithmetic mean of lambda over all concepts of one medium across all cases.
inline double medium_average(const Corpus& corpus, Medium medium) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : corpus.cases) {
    const auto& idx = medium == Medium::Text ? c.text_index : c.image_index;
    for (const auto& wc : idx.concepts) {
      sum += wc.lambda;
      ++count;
    }
  }
  if (count == 0 || sum <= 0.0)
    throw EvaluationError(std::string("no ") + medium_name(medium) +
                          " concepts with positive lambda in corpus");
  return sum / static_cast<double>(count);
}

// Only the ratio of the alphas is determined; the image side is fixed at 1.
inline AlphaPair compute_alpha(const AlignmentParams& p) {
  if (!(p.avg_txt > 0.0) || !(p.avg_img > 0.0))
    throw DomainError("alignment averages must be positive");
  if (p.rp_txt == 0.0 || p.rp_img == 0.0)
    throw EvaluationError(
        "degenerate partial-retrieval feedback (rp is 0); choose another recall level");
  detail::check_unit(p.rp_txt, "rp_txt");
  detail::check_unit(p.rp_img, "rp_img");
  AlphaPair a;
  a.alpha_img = 1.0;
  a.alpha_txt = (p.avg_img * p.rp_txt) / (p.avg_txt * p.rp_img);
  return a;
}

// Rescale lambda per medium; the factor fields stay untouched and the aligned
// lambda becomes the authoritative score. Values above 1 clamp to 1 so the
// fusion operators keep unit-interval inputs; *clamped counts how often.
inline ElementaryCase apply_alignment(const ElementaryCase& c, double alpha_txt,
                                      double alpha_img, std::size_t* clamped = nullptr) {
  if (!(alpha_txt > 0.0) || !(alpha_img > 0.0))
    throw DomainError("alignment alphas must be positive");
  ElementaryCase out = c;
  auto scale = [&](MediaIndex& idx, double alpha) {
    for (auto& wc : idx.concepts) {
      double v = wc.lambda * alpha;
      if (v > 1.0) {
        v = 1.0;
        if (clamped) ++*clamped;
      }
      wc.lambda = v;
    }
  };
  scale(out.text_index, alpha_txt);
  scale(out.image_index, alpha_img);
  return out;
}

struct AlignedCorpus {
  Corpus corpus;
  std::size_t clamped = 0;
};

inline AlignedCorpus apply_alignment(const Corpus& corpus, double alpha_txt, double alpha_img) {
  AlignedCorpus out;
  out.corpus.vocabulary = corpus.vocabulary;
  out.corpus.cases.reserve(corpus.cases.size());
  for (const auto& c : corpus.cases)
    out.corpus.cases.push_back(apply_alignment(c, alpha_txt, alpha_img, &out.clamped));
  return out;
}

}  // namespace cfuse

#endif
