// conceptfuse: staged concept-based multimodal retrieval pipeline.
//
// Subcommands: gen, fuse, cluster, query, eval, sweep. Every produced file
// gets a sibling <file>.manifest.json recording flags and input digests, so
// each published number is re-derivable. Exit codes: 0 ok, 1 data/domain
// error, 2 usage error.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conceptfuse/corpusgen.hpp"
#include "conceptfuse/manifest.hpp"
#include "conceptfuse/pipeline.hpp"

namespace {

using namespace cfuse;

RunManifest make_manifest(const std::string& command) {
  RunManifest m;
  m.command = command;
  return m;
}

void finish_output(RunManifest& manifest, const std::filesystem::path& path) {
  manifest.add_output(path);
  manifest.write_for(path);
}

// ---- gen --------------------------------------------------------------------

struct GenArgs {
  GenSpec spec;
  std::string corpus_path, queries_path, qrels_path;
};

void setup_gen(CLI::App& app, GenArgs& args) {
  auto* cmd = app.add_subcommand("gen", "generate a deterministic synthetic corpus");
  cmd->add_option("--seed", args.spec.seed, "random seed")->capture_default_str();
  cmd->add_option("--cases", args.spec.n_cases, "number of elementary cases")
      ->capture_default_str();
  cmd->add_option("--vocab", args.spec.vocab_size, "concept vocabulary size")
      ->capture_default_str();
  cmd->add_option("--concepts-per-text", args.spec.concepts_per_text,
                  "concepts per text index")
      ->capture_default_str();
  cmd->add_option("--concepts-per-image", args.spec.concepts_per_image,
                  "concepts per image index")
      ->capture_default_str();
  cmd->add_option("--overlap", args.spec.overlap_fraction,
                  "fraction of image concepts shared with the text index")
      ->capture_default_str();
  cmd->add_option("--queries", args.spec.n_queries, "number of queries")->capture_default_str();
  cmd->add_option("--relevant-per-query", args.spec.relevant_per_query,
                  "planted relevant cases per query")
      ->capture_default_str();
  cmd->add_option("--noise", args.spec.noise, "per-concept drop probability in relevant cases")
      ->capture_default_str();
  cmd->add_option("--corpus", args.corpus_path, "output corpus file")->required();
  cmd->add_option("--query-file", args.queries_path, "output query case file")->required();
  cmd->add_option("--qrels", args.qrels_path, "output qrels file")->required();
}

int run_gen(const GenArgs& args) {
  auto gen = generate(args.spec);
  auto manifest = make_manifest("gen");
  manifest.params = {{"seed", args.spec.seed},
                     {"cases", args.spec.n_cases},
                     {"vocab", args.spec.vocab_size},
                     {"concepts_per_text", args.spec.concepts_per_text},
                     {"concepts_per_image", args.spec.concepts_per_image},
                     {"overlap", args.spec.overlap_fraction},
                     {"queries", args.spec.n_queries},
                     {"relevant_per_query", args.spec.relevant_per_query},
                     {"noise", args.spec.noise}};
  write_case_file(gen.corpus, args.corpus_path);
  finish_output(manifest, args.corpus_path);
  write_case_file(gen.queries, args.queries_path);
  finish_output(manifest, args.queries_path);
  write_qrels(gen.qrels, args.qrels_path);
  finish_output(manifest, args.qrels_path);
  std::printf("gen: %zu cases, %zu queries, vocabulary %zu\n", gen.corpus.cases.size(),
              gen.queries.cases.size(), gen.corpus.vocabulary.size());
  return 0;
}

// ---- fuse -------------------------------------------------------------------

struct FuseArgs {
  std::string corpus_path, queries_path, qrels_path;
  std::string out_corpus, out_queries;
  std::string operator_name = "max";
  double recall_level = 0.30;
  double rp_txt = 0.0, rp_img = 0.0;
  bool auto_align_flag = false;
};

void setup_fuse(CLI::App& app, FuseArgs& args) {
  auto* cmd = app.add_subcommand("fuse", "align media weights and fuse the concept indexes");
  cmd->add_option("--corpus", args.corpus_path, "input corpus file")->required();
  cmd->add_option("--query-file", args.queries_path, "input query case file")->required();
  cmd->add_option("--operator", args.operator_name,
                  "fusion operator (max|bounded-sum|min|lukasiewicz|mean|symsum0)")
      ->capture_default_str();
  cmd->add_option("--recall-level", args.recall_level,
                  "recall level for the partial-retrieval feedback")
      ->capture_default_str();
  auto* rpt = cmd->add_option("--rp-txt", args.rp_txt, "text-only interpolated precision");
  auto* rpi = cmd->add_option("--rp-img", args.rp_img, "image-only interpolated precision");
  auto* aa = cmd->add_flag("--auto-align", args.auto_align_flag,
                           "derive rp values by running each medium alone (needs --qrels)");
  auto* qr = cmd->add_option("--qrels", args.qrels_path, "qrels for --auto-align");
  rpt->needs(rpi);
  rpi->needs(rpt);
  aa->excludes(rpt)->excludes(rpi);
  aa->needs(qr);
  cmd->add_option("--out-corpus", args.out_corpus, "fused corpus output")->required();
  cmd->add_option("--out-queries", args.out_queries, "fused queries output")->required();
}

int run_fuse(const FuseArgs& args, const CLI::App& cmd) {
  auto corpus = parse_case_file(args.corpus_path);
  auto queries = parse_case_file(args.queries_path);
  auto op = parse_operator(args.operator_name);

  AlignmentParams params;
  AlphaPair alphas;
  if (args.auto_align_flag) {
    auto qrels = parse_qrels(args.qrels_path);
    auto aa = auto_align(corpus, queries, qrels, args.recall_level);
    params = aa.params;
    alphas = aa.alphas;
  } else if (cmd.count("--rp-txt") > 0) {
    params.recall_level = args.recall_level;
    params.avg_txt = medium_average(corpus, Medium::Text);
    params.avg_img = medium_average(corpus, Medium::Image);
    params.rp_txt = args.rp_txt;
    params.rp_img = args.rp_img;
    alphas = compute_alpha(params);
  } else {
    // no feedback requested: media already on a common scale
    alphas = AlphaPair{1.0, 1.0};
  }

  auto fused = align_and_fuse(corpus, queries, alphas, op);

  auto manifest = make_manifest("fuse");
  manifest.params = {{"operator", operator_name(op)},
                     {"operator_formula", operator_formula(op)},
                     {"recall_level", params.recall_level},
                     {"avg_txt", params.avg_txt},
                     {"avg_img", params.avg_img},
                     {"rp_txt", params.rp_txt},
                     {"rp_img", params.rp_img},
                     {"alpha_txt", alphas.alpha_txt},
                     {"alpha_img", alphas.alpha_img},
                     {"clamped_corpus", fused.clamped_corpus},
                     {"clamped_queries", fused.clamped_queries}};
  manifest.add_input(args.corpus_path);
  manifest.add_input(args.queries_path);
  if (args.auto_align_flag) manifest.add_input(args.qrels_path);

  write_fused(fused.corpus, args.out_corpus);
  finish_output(manifest, args.out_corpus);
  write_fused(fused.queries, args.out_queries);
  finish_output(manifest, args.out_queries);
  std::printf("fuse: operator %s, alpha_txt %.6f, alpha_img %.6f, clamped %zu\n",
              operator_name(op), alphas.alpha_txt, alphas.alpha_img,
              fused.clamped_corpus + fused.clamped_queries);
  return 0;
}

// ---- cluster ----------------------------------------------------------------

struct ClusterArgs {
  std::string fused_path, out_path;
  double theta = 0.0;
  double eta_fallback = 0.01;
};

void setup_cluster(CLI::App& app, ClusterArgs& args) {
  auto* cmd = app.add_subcommand("cluster", "train the hyper-box model over a fused corpus");
  cmd->add_option("--fused", args.fused_path, "fused corpus file")->required();
  cmd->add_option("--theta", args.theta, "expansion budget in (0,1]")->required();
  cmd->add_option("--eta-fallback", args.eta_fallback, "sensitivity for degenerate boxes")
      ->capture_default_str();
  cmd->add_option("--out", args.out_path, "model output file")->required();
}

int run_cluster(const ClusterArgs& args) {
  auto fused = parse_fused(args.fused_path);
  auto model = train(fused, args.theta, args.eta_fallback);
  auto manifest = make_manifest("cluster");
  manifest.params = {{"theta", args.theta},
                     {"eta_fallback", args.eta_fallback},
                     {"boxes", model.boxes.size()},
                     {"dimensions", model.n}};
  manifest.add_input(args.fused_path);
  write_model(model, args.out_path);
  finish_output(manifest, args.out_path);
  std::printf("cluster: %zu boxes over %zu dimensions (theta %.4f)\n", model.boxes.size(),
              model.n, args.theta);
  return 0;
}

// ---- query ------------------------------------------------------------------

struct QueryArgs {
  std::string fused_path, queries_path, model_path, out_path;
  std::string similarity = "fsf";
  std::string tag = "conceptfuse";
  std::size_t k = 0;  // 0 = full depth
};

void setup_query(CLI::App& app, QueryArgs& args) {
  auto* cmd = app.add_subcommand("query", "rank the corpus for each query");
  cmd->add_option("--fused", args.fused_path, "fused corpus file")->required();
  cmd->add_option("--query-file", args.queries_path, "fused queries file")->required();
  cmd->add_option("--similarity", args.similarity,
                  "similarity (cosine|dice|jaccard|vsm|fsf)")
      ->capture_default_str();
  cmd->add_option("--k", args.k, "run depth per query (default: full corpus)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--model", args.model_path, "box model for pruned retrieval");
  cmd->add_option("--tag", args.tag, "run tag")->capture_default_str();
  cmd->add_option("--run", args.out_path, "run file output")->required();
}

int run_query(const QueryArgs& args) {
  auto fused = parse_fused(args.fused_path);
  auto queries = parse_fused(args.queries_path);
  auto kind = parse_similarity(args.similarity);
  SearchIndex index(fused);
  std::size_t k = args.k == 0 ? index.size() : args.k;

  BoxModel model;
  std::unique_ptr<Pruner> pruner;
  if (!args.model_path.empty()) {
    model = parse_model(args.model_path);
    pruner = std::make_unique<Pruner>(model, index);
  }
  auto stats = timed_queries(index, queries, k, kind, pruner.get());
  auto run = make_run(stats.lists, args.tag);

  auto manifest = make_manifest("query");
  manifest.params = {{"similarity", similarity_name(kind)},
                     {"k", k},
                     {"pruned", pruner != nullptr},
                     {"mean_query_ms", stats.mean_time_ms},
                     {"mean_candidates", stats.mean_candidates}};
  manifest.add_input(args.fused_path);
  manifest.add_input(args.queries_path);
  if (!args.model_path.empty()) manifest.add_input(args.model_path);
  write_run(run, args.out_path);
  finish_output(manifest, args.out_path);
  std::printf("query: %zu queries, %s%s, mean %.3f ms, mean candidates %.1f\n", queries.size(),
              similarity_name(kind), pruner ? " (pruned)" : "", stats.mean_time_ms,
              stats.mean_candidates);
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string run_path, qrels_path, out_path;
  std::vector<double> levels;
};

void setup_eval(CLI::App& app, EvalArgs& args) {
  auto* cmd = app.add_subcommand("eval", "score a run file against qrels");
  cmd->add_option("--run", args.run_path, "run file")->required();
  cmd->add_option("--qrels", args.qrels_path, "qrels file")->required();
  cmd->add_option("--levels", args.levels, "interpolated recall levels (default 0.0..1.0)");
  cmd->add_option("--out", args.out_path, "report output file");
}

int run_eval(const EvalArgs& args) {
  auto run = parse_run(args.run_path);
  auto qrels = parse_qrels(args.qrels_path);
  auto levels = args.levels.empty() ? default_levels() : args.levels;
  auto report = evaluate(group_run(run), qrels, levels);
  std::fputs(render_report_table(report).c_str(), stdout);
  if (!args.out_path.empty()) {
    auto manifest = make_manifest("eval");
    manifest.params = {{"levels", levels},
                       {"map", report.map},
                       {"r_precision", report.r_precision},
                       {"queries", report.per_query_ap.size()},
                       {"skipped", report.skipped_queries.size()}};
    manifest.add_input(args.run_path);
    manifest.add_input(args.qrels_path);
    detail::atomic_write(args.out_path, render_report_lines(report));
    finish_output(manifest, args.out_path);
  }
  return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string axis;
  std::string corpus_path, queries_path, qrels_path, out_path;
  std::string operator_name = "max";
  std::string similarity = "fsf";
  double recall_level = 0.30;
  double eta_fallback = 0.01;
  std::vector<double> grid;
};

void setup_sweep(CLI::App& app, SweepArgs& args) {
  auto* cmd = app.add_subcommand("sweep", "run the pipeline across a parameter grid");
  cmd->add_option("--axis", args.axis, "theta|rp|operator|similarity")
      ->required()
      ->check(CLI::IsMember({"theta", "rp", "operator", "similarity"}));
  cmd->add_option("--corpus", args.corpus_path, "input corpus file")->required();
  cmd->add_option("--query-file", args.queries_path, "input query case file")->required();
  cmd->add_option("--qrels", args.qrels_path, "qrels file")->required();
  cmd->add_option("--operator", args.operator_name, "operator for non-operator axes")
      ->capture_default_str();
  cmd->add_option("--similarity", args.similarity, "similarity for non-similarity axes")
      ->capture_default_str();
  cmd->add_option("--recall-level", args.recall_level, "feedback recall level for non-rp axes")
      ->capture_default_str();
  cmd->add_option("--eta-fallback", args.eta_fallback, "sensitivity for degenerate boxes")
      ->capture_default_str();
  cmd->add_option("--grid", args.grid, "numeric grid for theta/rp axes");
  cmd->add_option("--out", args.out_path, "table output file")->required();
}

int run_sweep(const SweepArgs& args) {
  auto corpus = parse_case_file(args.corpus_path);
  auto queries = parse_case_file(args.queries_path);
  auto qrels = parse_qrels(args.qrels_path);
  auto base_op = parse_operator(args.operator_name);
  auto base_sim = parse_similarity(args.similarity);

  std::vector<double> grid = args.grid;
  if (grid.empty()) {
    if (args.axis == "theta")
      grid = {0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0};
    else if (args.axis == "rp")
      for (int i = 0; i <= 6; ++i) grid.push_back(i / 10.0);
  }
  if ((args.axis == "theta" || args.axis == "rp") && grid.empty())
    throw DomainError("empty grid");

  std::string table = "# axis " + args.axis + "\n";
  table += "# value boxes map mean_query_ms mean_candidates\n";
  char buf[160];

  auto run_point = [&](const std::string& label, FusionOperator op, SimilarityKind sim,
                       double recall, const BoxModel* model,
                       const std::vector<FusedCase>& fused_corpus,
                       const std::vector<FusedCase>& fused_queries) {
    SearchIndex index(fused_corpus);
    std::unique_ptr<Pruner> pruner;
    if (model) pruner = std::make_unique<Pruner>(*model, index);
    auto stats = timed_queries(index, fused_queries, index.size(), sim, pruner.get());
    double map = mean_average_precision(stats.lists, qrels);
    (void)op;
    (void)recall;
    std::snprintf(buf, sizeof buf, "%s %zu %.6f %.4f %.1f\n", label.c_str(),
                  model ? model->boxes.size() : std::size_t{0}, map, stats.mean_time_ms,
                  stats.mean_candidates);
    table += buf;
  };

  if (args.axis == "theta") {
    auto aa = auto_align(corpus, queries, qrels, args.recall_level);
    auto fused = align_and_fuse(corpus, queries, aa.alphas, base_op);
    for (double theta : grid) {
      auto model = train(fused.corpus, theta, args.eta_fallback);
      run_point(detail::format_number(theta), base_op, base_sim, args.recall_level, &model,
                fused.corpus, fused.queries);
    }
  } else if (args.axis == "rp") {
    for (double level : grid) {
      auto aa = auto_align(corpus, queries, qrels, level);
      auto fused = align_and_fuse(corpus, queries, aa.alphas, base_op);
      run_point(detail::format_number(level), base_op, base_sim, level, nullptr, fused.corpus,
                fused.queries);
    }
  } else if (args.axis == "operator") {
    auto aa = auto_align(corpus, queries, qrels, args.recall_level);
    for (auto op : kAllFusionOperators) {
      auto fused = align_and_fuse(corpus, queries, aa.alphas, op);
      run_point(operator_name(op), op, base_sim, args.recall_level, nullptr, fused.corpus,
                fused.queries);
    }
  } else {  // similarity
    auto aa = auto_align(corpus, queries, qrels, args.recall_level);
    auto fused = align_and_fuse(corpus, queries, aa.alphas, base_op);
    for (auto sim : kAllSimilarities)
      run_point(similarity_name(sim), base_op, sim, args.recall_level, nullptr, fused.corpus,
                fused.queries);
  }

  auto manifest = make_manifest("sweep");
  manifest.params = {{"axis", args.axis},
                     {"operator", operator_name(base_op)},
                     {"similarity", similarity_name(base_sim)},
                     {"recall_level", args.recall_level},
                     {"eta_fallback", args.eta_fallback},
                     {"grid", grid}};
  manifest.add_input(args.corpus_path);
  manifest.add_input(args.queries_path);
  manifest.add_input(args.qrels_path);
  detail::atomic_write(args.out_path, table);
  finish_output(manifest, args.out_path);
  std::fputs(table.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept-based multimodal retrieval pipeline"};
  app.require_subcommand(1);

  GenArgs gen_args;
  FuseArgs fuse_args;
  ClusterArgs cluster_args;
  QueryArgs query_args;
  EvalArgs eval_args;
  SweepArgs sweep_args;
  setup_gen(app, gen_args);
  setup_fuse(app, fuse_args);
  setup_cluster(app, cluster_args);
  setup_query(app, query_args);
  setup_eval(app, eval_args);
  setup_sweep(app, sweep_args);

  try {
    app.parse(argc, argv);
    if (app.got_subcommand("gen")) return run_gen(gen_args);
    if (app.got_subcommand("fuse")) return run_fuse(fuse_args, *app.get_subcommand("fuse"));
    if (app.got_subcommand("cluster")) return run_cluster(cluster_args);
    if (app.got_subcommand("query")) return run_query(query_args);
    if (app.got_subcommand("eval")) return run_eval(eval_args);
    if (app.got_subcommand("sweep")) return run_sweep(sweep_args);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const cfuse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
