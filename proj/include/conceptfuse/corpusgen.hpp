#ifndef CONCEPTFUSE_CORPUSGEN_HPP
#define CONCEPTFUSE_CORPUSGEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/errors.hpp"
#include "conceptfuse/ingest.hpp"

namespace cfuse {

// splitmix64: portable, published reference output, exact integer arithmetic.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

struct GenSpec {
  std::uint64_t seed = 42;
  std::size_t n_cases = 500;
  std::size_t vocab_size = 2000;
  std::size_t concepts_per_text = 20;
  std::size_t concepts_per_image = 8;
  double overlap_fraction = 0.5;
  std::size_t n_queries = 20;
  std::size_t relevant_per_query = 10;
  double noise = 0.2;
};

// The desk-scale regression corpus all pinned numbers refer to.
inline GenSpec reference_spec() { return GenSpec{}; }

struct GenResult {
  Corpus corpus;
  Corpus queries;
  Qrels qrels;
};

namespace gendetail {

inline std::string cui_name(std::uint32_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%07u", index + 1);
  return buf;
}

inline std::string padded_id(char prefix, std::size_t index, std::size_t width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, static_cast<int>(width), index + 1);
  return buf;
}

inline std::size_t id_width(std::size_t count) {
  std::size_t w = 1, v = count;
  while (v >= 10) {
    v /= 10;
    ++w;
  }
  return std::max<std::size_t>(w, 3);
}

// Factor profile of a concept inside one medium's index: text concepts have
// a crisp confidence (mu = 1), whole-image concepts a unit frequency (nu = 1).
inline WeightedConcept draw_concept(Medium medium, std::uint32_t cui_index, SplitMix64& rng) {
  auto draw = [&rng] { return 0.05 + 0.95 * rng.unit(); };
  double mu = 1.0, nu = 1.0;
  (medium == Medium::Text ? nu : mu) = draw();
  return WeightedConcept(ConceptId(cui_name(cui_index)), mu, nu, draw(), draw());
}

inline std::vector<std::uint32_t> sample_distinct(std::size_t count, std::size_t vocab_size,
                                                  const std::set<std::uint32_t>& exclude,
                                                  SplitMix64& rng) {
  std::vector<std::uint32_t> out;
  std::set<std::uint32_t> used;
  while (out.size() < count) {
    auto v = static_cast<std::uint32_t>(rng.below(vocab_size));
    if (exclude.count(v) || used.count(v)) continue;
    used.insert(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace gendetail

inline void validate_spec(const GenSpec& s) {
  if (s.n_cases == 0 || s.vocab_size == 0 || s.concepts_per_text == 0 ||
      s.concepts_per_image == 0 || s.n_queries == 0 || s.relevant_per_query == 0)
    throw SpecError("generator counts must be positive");
  if (s.vocab_size > 9999999) throw SpecError("vocab_size exceeds the CUI space");
  if (!(s.overlap_fraction >= 0.0 && s.overlap_fraction <= 1.0))
    throw SpecError("overlap_fraction must lie in [0,1]");
  if (!(s.noise >= 0.0 && s.noise <= 1.0)) throw SpecError("noise must lie in [0,1]");
  if (s.overlap_fraction * static_cast<double>(s.concepts_per_image) >
      static_cast<double>(s.concepts_per_text) + 1e-12)
    throw SpecError("image overlap cannot exceed the text concept count");
  if (s.relevant_per_query >= s.n_cases)
    throw SpecError("relevant_per_query must be below n_cases");
  if (s.n_queries * s.relevant_per_query > s.n_cases)
    throw SpecError("not enough cases for the requested relevant sets");
  if (s.vocab_size < 2 * (s.concepts_per_text + s.concepts_per_image))
    throw SpecError("vocab too small for the requested concept counts");
}

// Deterministic synthetic corpus with planted complementarity: for each query,
// relevant cases are perturbed copies whose evidence cycles between the text
// medium, the image medium, and both, so single-medium retrieval misses a
// known share of relevant cases while the fused index sees them all.
inline GenResult generate(const GenSpec& spec) {
  validate_spec(spec);
  SplitMix64 rng(spec.seed);
  GenResult res;

  const std::size_t case_width = gendetail::id_width(spec.n_cases);
  const std::size_t query_width = gendetail::id_width(spec.n_queries);
  const auto k_shared =
      static_cast<std::size_t>(std::llround(spec.overlap_fraction *
                                            static_cast<double>(spec.concepts_per_image)));

  std::set<ConceptId> corpus_vocab, query_vocab;

  auto push_case = [](Corpus& c, std::set<ConceptId>& vocab, ElementaryCase&& ec) {
    for (const auto& wc : ec.text_index.concepts) vocab.insert(wc.cui);
    for (const auto& wc : ec.image_index.concepts) vocab.insert(wc.cui);
    c.cases.push_back(std::move(ec));
  };

  struct QueryPlan {
    std::string id;
    // query concepts in a fixed order: text concepts first, then image-only
    std::vector<std::uint32_t> ordered;
    std::set<std::uint32_t> text_set, image_set, all;
    std::map<std::uint32_t, WeightedConcept> carrier;  // factor source per concept
  };
  std::vector<QueryPlan> plans;

  for (std::size_t qi = 0; qi < spec.n_queries; ++qi) {
    QueryPlan plan;
    plan.id = gendetail::padded_id('q', qi, query_width);

    auto text = gendetail::sample_distinct(spec.concepts_per_text, spec.vocab_size, {}, rng);
    // image index shares its leading k_shared concepts with the text index
    std::vector<std::uint32_t> image(text.begin(),
                                     text.begin() + static_cast<long>(
                                                        std::min(k_shared, text.size())));
    std::set<std::uint32_t> text_excl(text.begin(), text.end());
    for (auto v : gendetail::sample_distinct(spec.concepts_per_image - image.size(),
                                             spec.vocab_size, text_excl, rng))
      image.push_back(v);

    ElementaryCase qc;
    qc.case_id = plan.id;
    qc.text_index.medium = Medium::Text;
    qc.image_index.medium = Medium::Image;
    qc.image_ref = plan.id + ".img";
    for (auto v : text) {
      auto wc = gendetail::draw_concept(Medium::Text, v, rng);
      plan.carrier.emplace(v, wc);
      qc.text_index.concepts.push_back(std::move(wc));
    }
    for (auto v : image) {
      auto wc = gendetail::draw_concept(Medium::Image, v, rng);
      plan.carrier.emplace(v, wc);  // text carrier wins for shared concepts
      qc.image_index.concepts.push_back(std::move(wc));
    }

    plan.text_set.insert(text.begin(), text.end());
    plan.image_set.insert(image.begin(), image.end());
    plan.all = plan.text_set;
    plan.all.insert(plan.image_set.begin(), plan.image_set.end());
    plan.ordered = text;
    for (auto v : image)
      if (!plan.text_set.count(v)) plan.ordered.push_back(v);

    push_case(res.queries, query_vocab, std::move(qc));
    plans.push_back(std::move(plan));
  }

  std::size_t case_counter = 0;
  auto next_case_id = [&] { return gendetail::padded_id('d', case_counter++, case_width); };

  for (std::size_t qi = 0; qi < spec.n_queries; ++qi) {
    const auto& plan = plans[qi];
    bool has_image_only = plan.image_set.size() > k_shared ||
                          [&] {
                            for (auto v : plan.image_set)
                              if (!plan.text_set.count(v)) return true;
                            return false;
                          }();

    for (std::size_t r = 0; r < spec.relevant_per_query; ++r) {
      // 0: evidence in text, 1: in image, 2: in both media
      int side = static_cast<int>(r % 3);
      if (side == 1 && !has_image_only) side = 2;

      std::vector<std::uint32_t> kept;
      for (auto v : plan.ordered)
        if (rng.unit() >= spec.noise) kept.push_back(v);
      if (kept.empty()) kept.push_back(plan.ordered.front());
      std::set<std::uint32_t> kept_set(kept.begin(), kept.end());

      ElementaryCase ec;
      ec.case_id = next_case_id();
      ec.text_index.medium = Medium::Text;
      ec.image_index.medium = Medium::Image;
      ec.image_ref = ec.case_id + ".img";

      std::set<std::uint32_t> used = plan.all;  // fillers stay off the query concepts
      auto filler = [&](Medium medium, std::size_t count, std::vector<WeightedConcept>& out) {
        for (auto v : gendetail::sample_distinct(count, spec.vocab_size, used, rng)) {
          used.insert(v);
          out.push_back(gendetail::draw_concept(medium, v, rng));
        }
      };
      // Carried factors keep the query's lambda but are re-expressed under
      // the destination medium's profile (one of mu/nu is always 1).
      auto carried = [&](std::uint32_t v, Medium medium) {
        WeightedConcept wc = plan.carrier.at(v);
        double conf = wc.mu * wc.nu;
        wc.mu = medium == Medium::Text ? 1.0 : conf;
        wc.nu = medium == Medium::Text ? conf : 1.0;
        return wc;
      };

      if (side == 0) {
        // all kept concepts in the text index; image index holds a shared
        // slice of the text side (away from the query's image concepts when
        // possible) plus fresh padding
        for (auto v : kept) ec.text_index.concepts.push_back(carried(v, Medium::Text));
        std::vector<std::uint32_t> shared_pool;
        for (auto v : kept)
          if (!plan.image_set.count(v)) shared_pool.push_back(v);
        for (auto v : kept)
          if (plan.image_set.count(v)) shared_pool.push_back(v);
        std::size_t want_shared = std::min(k_shared, shared_pool.size());
        for (std::size_t i = 0; i < want_shared; ++i)
          ec.image_index.concepts.push_back(carried(shared_pool[i], Medium::Image));
        filler(Medium::Image, spec.concepts_per_image - want_shared, ec.image_index.concepts);
      } else if (side == 1) {
        // all kept concepts in the image index; the text index is pure filler
        for (auto v : kept) ec.image_index.concepts.push_back(carried(v, Medium::Image));
        filler(Medium::Text, spec.concepts_per_text, ec.text_index.concepts);
      } else {
        // media-faithful: text concepts to text, image concepts to image,
        // shared query concepts to both
        for (auto v : kept)
          if (plan.text_set.count(v)) ec.text_index.concepts.push_back(carried(v, Medium::Text));
        for (auto v : kept)
          if (plan.image_set.count(v))
            ec.image_index.concepts.push_back(carried(v, Medium::Image));
        if (ec.text_index.concepts.size() < spec.concepts_per_text)
          filler(Medium::Text, spec.concepts_per_text - ec.text_index.concepts.size(),
                 ec.text_index.concepts);
        if (ec.image_index.concepts.size() < spec.concepts_per_image) {
          // padding follows the corpus overlap rule: a share of it mirrors
          // the case's own text side so overlap = 1 keeps image inside text
          std::size_t pad = spec.concepts_per_image - ec.image_index.concepts.size();
          auto want_shared = static_cast<std::size_t>(
              std::llround(spec.overlap_fraction * static_cast<double>(pad)));
          std::set<ConceptId> image_ids;
          for (const auto& wc : ec.image_index.concepts) image_ids.insert(wc.cui);
          std::size_t taken = 0;
          for (const auto& wc : ec.text_index.concepts) {
            if (taken >= want_shared) break;
            if (image_ids.count(wc.cui)) continue;
            WeightedConcept mirrored = wc;
            mirrored.mu = mirrored.nu;
            mirrored.nu = 1.0;
            ec.image_index.concepts.push_back(mirrored);
            image_ids.insert(wc.cui);
            ++taken;
          }
          filler(Medium::Image, pad - taken, ec.image_index.concepts);
        }
      }

      res.qrels.judgments[{plan.id, ec.case_id}] = 1;
      push_case(res.corpus, corpus_vocab, std::move(ec));
    }
  }

  // background cases: random indexes honoring the media overlap rule
  while (case_counter < spec.n_cases) {
    ElementaryCase ec;
    ec.case_id = next_case_id();
    ec.text_index.medium = Medium::Text;
    ec.image_index.medium = Medium::Image;
    ec.image_ref = ec.case_id + ".img";
    auto text = gendetail::sample_distinct(spec.concepts_per_text, spec.vocab_size, {}, rng);
    for (auto v : text) ec.text_index.concepts.push_back(gendetail::draw_concept(Medium::Text, v, rng));
    for (std::size_t i = 0; i < std::min(k_shared, text.size()); ++i)
      ec.image_index.concepts.push_back(gendetail::draw_concept(Medium::Image, text[i], rng));
    std::set<std::uint32_t> excl(text.begin(), text.end());
    for (auto v : gendetail::sample_distinct(spec.concepts_per_image - ec.image_index.concepts.size(),
                                             spec.vocab_size, excl, rng))
      ec.image_index.concepts.push_back(gendetail::draw_concept(Medium::Image, v, rng));
    push_case(res.corpus, corpus_vocab, std::move(ec));
  }

  res.corpus.vocabulary.assign(corpus_vocab.begin(), corpus_vocab.end());
  res.queries.vocabulary.assign(query_vocab.begin(), query_vocab.end());
  return res;
}

}  // namespace cfuse

#endif
