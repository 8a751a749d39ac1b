#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "conceptfuse/corpusgen.hpp"
#include "conceptfuse/fusion.hpp"

using namespace cfuse;

TEST_CASE("splitmix64 matches the published reference sequence") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFull);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ull);
  CHECK(rng.next() == 0x06C45D188009454Full);
}

TEST_CASE("splitmix64 unit stays in the half-open interval") {
  SplitMix64 rng(123);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

namespace {

GenSpec small_spec(std::uint64_t seed) {
  GenSpec s;
  s.seed = seed;
  s.n_cases = 60;
  s.vocab_size = 300;
  s.concepts_per_text = 8;
  s.concepts_per_image = 4;
  s.overlap_fraction = 0.5;
  s.n_queries = 5;
  s.relevant_per_query = 6;
  s.noise = 0.2;
  return s;
}

}  // namespace

TEST_CASE("generation is deterministic for a fixed seed") {
  auto a = generate(small_spec(7));
  auto b = generate(small_spec(7));
  CHECK(render_case_file(a.corpus) == render_case_file(b.corpus));
  CHECK(render_case_file(a.queries) == render_case_file(b.queries));
  CHECK(render_qrels(a.qrels) == render_qrels(b.qrels));

  auto c = generate(small_spec(8));
  CHECK(render_case_file(a.corpus) != render_case_file(c.corpus));
}

TEST_CASE("generated shapes and identifiers") {
  auto spec = small_spec(21);
  auto gen = generate(spec);
  REQUIRE(gen.corpus.cases.size() == spec.n_cases);
  REQUIRE(gen.queries.cases.size() == spec.n_queries);
  CHECK(gen.corpus.cases.front().case_id == "d001");
  CHECK(gen.corpus.cases.back().case_id == "d060");
  CHECK(gen.queries.cases.front().case_id == "q001");

  // ids are unique and every case carries both media
  std::set<std::string> ids;
  for (const auto& c : gen.corpus.cases) {
    CHECK(ids.insert(c.case_id).second);
    CHECK(!c.text_index.concepts.empty());
    CHECK(!c.image_index.concepts.empty());
    CHECK(c.image_ref == c.case_id + ".img");
  }
}

TEST_CASE("factors respect the media profiles and stay in range") {
  auto gen = generate(small_spec(33));
  auto check_index = [](const MediaIndex& idx) {
    for (const auto& wc : idx.concepts) {
      if (idx.medium == Medium::Text)
        CHECK(wc.mu == 1.0);
      else
        CHECK(wc.nu == 1.0);
      for (double f : {wc.mu, wc.nu, wc.omega, wc.phi}) {
        CHECK(f >= 0.05);
        CHECK(f <= 1.0);
      }
      CHECK(wc.lambda >= 0.0);
      CHECK(wc.lambda <= 1.0);
    }
  };
  for (const auto& c : gen.corpus.cases) {
    check_index(c.text_index);
    check_index(c.image_index);
  }
}

TEST_CASE("qrels reference generated ids only, one block per query") {
  auto spec = small_spec(44);
  auto gen = generate(spec);
  std::set<std::string> case_ids, query_ids;
  for (const auto& c : gen.corpus.cases) case_ids.insert(c.case_id);
  for (const auto& q : gen.queries.cases) query_ids.insert(q.case_id);
  std::map<std::string, int> per_query;
  for (const auto& [key, rel] : gen.qrels.judgments) {
    CHECK(query_ids.count(key.first) == 1);
    CHECK(case_ids.count(key.second) == 1);
    CHECK(rel == 1);
    per_query[key.first]++;
  }
  REQUIRE(per_query.size() == spec.n_queries);
  for (const auto& [qid, n] : per_query) CHECK(n == static_cast<int>(spec.relevant_per_query));
}

TEST_CASE("full overlap with zero noise leaves no single-medium image concepts") {
  auto spec = small_spec(55);
  spec.overlap_fraction = 1.0;
  spec.concepts_per_image = 4;
  spec.concepts_per_text = 8;
  spec.noise = 0.0;
  auto gen = generate(spec);
  for (const auto& c : gen.corpus.cases) {
    auto fc = fuse_case(c, FusionOperator::Max);
    for (const auto& [cui, e] : fc.entries) CHECK(e.provenance != Provenance::ImageOnly);
  }
}

TEST_CASE("zero noise plants every query concept in each relevant case") {
  auto spec = small_spec(66);
  spec.noise = 0.0;
  auto gen = generate(spec);
  std::map<std::string, std::set<ConceptId>> query_concepts;
  for (const auto& q : gen.queries.cases) {
    auto& s = query_concepts[q.case_id];
    for (const auto& wc : q.text_index.concepts) s.insert(wc.cui);
    for (const auto& wc : q.image_index.concepts) s.insert(wc.cui);
  }
  std::map<std::string, const ElementaryCase*> by_id;
  for (const auto& c : gen.corpus.cases) by_id[c.case_id] = &c;
  for (const auto& [key, rel] : gen.qrels.judgments) {
    const auto* c = by_id.at(key.second);
    std::set<ConceptId> have;
    for (const auto& wc : c->text_index.concepts) have.insert(wc.cui);
    for (const auto& wc : c->image_index.concepts) have.insert(wc.cui);
    for (const auto& cui : query_concepts.at(key.first)) CHECK(have.count(cui) == 1);
  }
}

TEST_CASE("vocabulary is the sorted union of all case concepts") {
  auto gen = generate(small_spec(77));
  std::set<ConceptId> expect;
  for (const auto& c : gen.corpus.cases) {
    for (const auto& wc : c.text_index.concepts) expect.insert(wc.cui);
    for (const auto& wc : c.image_index.concepts) expect.insert(wc.cui);
  }
  CHECK(gen.corpus.vocabulary == std::vector<ConceptId>(expect.begin(), expect.end()));
}

TEST_CASE("infeasible generator settings are rejected") {
  auto bad = small_spec(1);
  bad.n_queries = 0;
  CHECK_THROWS_AS(generate(bad), SpecError);

  bad = small_spec(1);
  bad.overlap_fraction = 1.5;
  CHECK_THROWS_AS(generate(bad), SpecError);

  bad = small_spec(1);
  bad.noise = -0.1;
  CHECK_THROWS_AS(generate(bad), SpecError);

  bad = small_spec(1);
  bad.concepts_per_image = 20;  // overlap demands more shared cuis than the text side has
  bad.vocab_size = 300;
  CHECK_THROWS_AS(generate(bad), SpecError);

  bad = small_spec(1);
  bad.relevant_per_query = bad.n_cases;
  CHECK_THROWS_AS(generate(bad), SpecError);

  bad = small_spec(1);
  bad.n_queries = 11;  // 11 * 6 > 60
  CHECK_THROWS_AS(generate(bad), SpecError);

  bad = small_spec(1);
  bad.vocab_size = 20;
  CHECK_THROWS_AS(generate(bad), SpecError);
}

TEST_CASE("the regression settings are the documented defaults") {
  auto ref = reference_spec();
  CHECK(ref.seed == 42);
  CHECK(ref.n_cases == 500);
  CHECK(ref.vocab_size == 2000);
  CHECK(ref.concepts_per_text == 20);
  CHECK(ref.concepts_per_image == 8);
  CHECK(ref.overlap_fraction == 0.5);
  CHECK(ref.n_queries == 20);
  CHECK(ref.relevant_per_query == 10);
  CHECK(ref.noise == 0.2);
}
