#ifndef CONCEPTFUSE_INGEST_HPP
#define CONCEPTFUSE_INGEST_HPP

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conceptfuse/concept_model.hpp"
#include "conceptfuse/errors.hpp"

namespace cfuse {

struct Corpus {
  std::vector<ElementaryCase> cases;      // sorted by case_id
  std::vector<ConceptId> vocabulary;      // sorted distinct cuis over all media
};

struct Qrels {
  // (query_id, case_id) -> relevance; 0 means judged non-relevant.
  std::map<std::pair<std::string, std::string>, int> judgments;

  int relevance(const std::string& query_id, const std::string& case_id) const {
    auto it = judgments.find({query_id, case_id});
    return it == judgments.end() ? 0 : it->second;
  }

  int total_relevant(const std::string& query_id) const {
    int n = 0;
    for (auto it = judgments.lower_bound({query_id, std::string()});
         it != judgments.end() && it->first.first == query_id; ++it)
      if (it->second > 0) ++n;
    return n;
  }
};

struct RunRow {
  std::string query_id;
  std::string case_id;
  int rank = 1;  // 1-based, consecutive within a query
  double score = 0.0;
  std::string tag;
};

struct RunFile {
  std::vector<RunRow> rows;
};

namespace detail {

// Shortest representation that round-trips through from_chars.
inline std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline double parse_number(std::string_view tok, const std::string& path, std::size_t line) {
  double v = 0.0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
    throw ParseError(path, line, "bad number '" + std::string(tok) + "'");
  return v;
}

inline long parse_int(std::string_view tok, const std::string& path, std::size_t line) {
  long v = 0;
  auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
    throw ParseError(path, line, "bad integer '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split_char(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Write via a temp file and rename, so readers never see partial output.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Duplicate cuis within one medium of one case merge by per-factor max,
// so input order never matters.
inline void merge_concept(std::map<ConceptId, WeightedConcept>& m, WeightedConcept wc) {
  auto [it, inserted] = m.try_emplace(wc.cui, wc);
  if (!inserted) {
    auto& e = it->second;
    e.mu = std::max(e.mu, wc.mu);
    e.nu = std::max(e.nu, wc.nu);
    e.omega = std::max(e.omega, wc.omega);
    e.phi = std::max(e.phi, wc.phi);
    e.lambda = compute_lambda(e.mu, e.nu, e.omega, e.phi);
  }
}

}  // namespace detail

// --- corpus index files ----------------------------------------------------
//
// One elementary case is two lines:
//   <case_id> text <cui>:<mu>:<nu>:<omega>:<phi> ...
//   <case_id> image <image_ref> <cui>:<mu>:<nu>:<omega>:<phi> ...
// A two-part token <cui>:<val> maps val to nu for text and mu for images;
// the remaining factors default to 1. image_ref "-" means none.

inline Corpus parse_case_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  const std::string pstr = path.string();

  std::map<std::string, ElementaryCase> cases;
  std::map<std::string, std::pair<bool, bool>> seen;  // case_id -> (text, image)
  std::set<ConceptId> vocab;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 2) throw ParseError(pstr, lineno, "expected '<case_id> <medium> ...'");
    std::string case_id(toks[0]);
    Medium medium;
    if (toks[1] == "text") medium = Medium::Text;
    else if (toks[1] == "image") medium = Medium::Image;
    else throw ParseError(pstr, lineno, "unknown medium '" + std::string(toks[1]) + "'");

    std::size_t first_concept = 2;
    std::string image_ref;
    if (medium == Medium::Image) {
      if (toks.size() < 3) throw ParseError(pstr, lineno, "image line needs an image_ref");
      if (toks[2] != "-") image_ref = std::string(toks[2]);
      first_concept = 3;
    }

    auto& flags = seen[case_id];
    bool& flag = medium == Medium::Text ? flags.first : flags.second;
    if (flag)
      throw DataError(pstr + ":" + std::to_string(lineno) + ": duplicate " +
                      medium_name(medium) + " record for case '" + case_id + "'");
    flag = true;

    std::map<ConceptId, WeightedConcept> merged;
    for (std::size_t t = first_concept; t < toks.size(); ++t) {
      auto parts = detail::split_char(toks[t], ':');
      if (parts.size() != 2 && parts.size() != 5)
        throw ParseError(pstr, lineno, "bad concept token '" + std::string(toks[t]) + "'");
      std::string cui_str(parts[0]);
      if (!ConceptId::is_valid(cui_str))
        throw ParseError(pstr, lineno, "bad CUI '" + cui_str + "'");
      double mu = 1.0, nu = 1.0, omega = 1.0, phi = 1.0;
      if (parts.size() == 2) {
        double val = detail::parse_number(parts[1], pstr, lineno);
        (medium == Medium::Text ? nu : mu) = val;
      } else {
        mu = detail::parse_number(parts[1], pstr, lineno);
        nu = detail::parse_number(parts[2], pstr, lineno);
        omega = detail::parse_number(parts[3], pstr, lineno);
        phi = detail::parse_number(parts[4], pstr, lineno);
      }
      for (auto [v, name] : {std::pair{mu, "mu"}, {nu, "nu"}, {omega, "omega"}, {phi, "phi"}})
        if (!(v >= 0.0 && v <= 1.0))
          throw DomainError(pstr + ":" + std::to_string(lineno) + ": " + name +
                            " outside [0,1] for " + cui_str);
      detail::merge_concept(merged, WeightedConcept(ConceptId(cui_str), mu, nu, omega, phi));
    }

    auto& c = cases[case_id];
    c.case_id = case_id;
    MediaIndex idx;
    idx.medium = medium;
    for (auto& [cui, wc] : merged) {
      vocab.insert(cui);
      idx.concepts.push_back(wc);
    }
    if (medium == Medium::Text) {
      c.text_index = std::move(idx);
    } else {
      c.image_index = std::move(idx);
      c.image_ref = image_ref;
    }
  }

  Corpus corpus;
  for (auto& [id, c] : cases) {
    c.text_index.medium = Medium::Text;
    c.image_index.medium = Medium::Image;
    corpus.cases.push_back(std::move(c));
  }
  corpus.vocabulary.assign(vocab.begin(), vocab.end());
  return corpus;
}

inline std::string render_case_file(const Corpus& corpus) {
  std::string out;
  auto sorted = corpus.cases;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
  for (const auto& c : sorted) {
    auto emit = [&](const MediaIndex& idx) {
      out += c.case_id;
      out += ' ';
      out += medium_name(idx.medium);
      if (idx.medium == Medium::Image) {
        out += ' ';
        out += c.image_ref.empty() ? "-" : c.image_ref;
      }
      auto concepts = idx.concepts;
      std::sort(concepts.begin(), concepts.end(),
                [](const auto& a, const auto& b) { return a.cui < b.cui; });
      for (const auto& wc : concepts) {
        out += ' ';
        out += wc.cui.value;
        out += ':';
        out += detail::format_number(wc.mu);
        out += ':';
        out += detail::format_number(wc.nu);
        out += ':';
        out += detail::format_number(wc.omega);
        out += ':';
        out += detail::format_number(wc.phi);
      }
      out += '\n';
    };
    emit(c.text_index);
    emit(c.image_index);
  }
  return out;
}

inline void write_case_file(const Corpus& corpus, const std::filesystem::path& path) {
  detail::atomic_write(path, render_case_file(corpus));
}

// --- TREC qrels (4 columns: query_id 0 case_id relevance) -------------------

inline Qrels parse_qrels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  const std::string pstr = path.string();
  Qrels q;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 4)
      throw ParseError(pstr, lineno, "expected 4 columns, got " + std::to_string(toks.size()));
    long rel = detail::parse_int(toks[3], pstr, lineno);
    if (rel < 0) throw ParseError(pstr, lineno, "negative relevance");
    // later lines override earlier ones for the same (query, case)
    q.judgments[{std::string(toks[0]), std::string(toks[2])}] = static_cast<int>(rel);
  }
  return q;
}

inline std::string render_qrels(const Qrels& q) {
  std::string out;
  for (const auto& [key, rel] : q.judgments) {
    out += key.first;
    out += " 0 ";
    out += key.second;
    out += ' ';
    out += std::to_string(rel);
    out += '\n';
  }
  return out;
}

inline void write_qrels(const Qrels& q, const std::filesystem::path& path) {
  detail::atomic_write(path, render_qrels(q));
}

// --- TREC run files (6 columns: query_id Q0 case_id rank score tag) ---------

inline void validate_run(const RunFile& run) {
  std::map<std::string, std::pair<int, double>> last;  // query -> (rank, score)
  for (const auto& r : run.rows) {
    auto it = last.find(r.query_id);
    if (it == last.end()) {
      if (r.rank != 1)
        throw ContractError("run: query " + r.query_id + " does not start at rank 1");
      last[r.query_id] = {r.rank, r.score};
    } else {
      if (r.rank != it->second.first + 1)
        throw ContractError("run: rank gap at query " + r.query_id + " rank " +
                            std::to_string(r.rank));
      if (r.score > it->second.second)
        throw ContractError("run: score inversion at query " + r.query_id + " rank " +
                            std::to_string(r.rank));
      it->second = {r.rank, r.score};
    }
  }
}

inline RunFile parse_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  const std::string pstr = path.string();
  RunFile run;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 6)
      throw ParseError(pstr, lineno, "expected 6 columns, got " + std::to_string(toks.size()));
    RunRow r;
    r.query_id = std::string(toks[0]);
    r.case_id = std::string(toks[2]);
    r.rank = static_cast<int>(detail::parse_int(toks[3], pstr, lineno));
    r.score = detail::parse_number(toks[4], pstr, lineno);
    r.tag = std::string(toks[5]);
    run.rows.push_back(std::move(r));
  }
  return run;
}

inline std::string render_run(const RunFile& run) {
  validate_run(run);
  std::string out;
  for (const auto& r : run.rows) {
    out += r.query_id;
    out += " Q0 ";
    out += r.case_id;
    out += ' ';
    out += std::to_string(r.rank);
    out += ' ';
    out += detail::format_fixed6(r.score);
    out += ' ';
    out += r.tag;
    out += '\n';
  }
  return out;
}

inline void write_run(const RunFile& run, const std::filesystem::path& path) {
  detail::atomic_write(path, render_run(run));
}

}  // namespace cfuse

#endif
