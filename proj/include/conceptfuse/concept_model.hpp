#ifndef CONCEPTFUSE_CONCEPT_MODEL_HPP
#define CONCEPTFUSE_CONCEPT_MODEL_HPP

#include <cctype>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "conceptfuse/errors.hpp"

namespace cfuse {

// UMLS Concept Unique Identifier: 'C' followed by exactly 7 digits.
struct ConceptId {
  std::string value;

  ConceptId() = default;
  explicit ConceptId(std::string v) : value(std::move(v)) {
    if (!is_valid(value)) throw DomainError("invalid CUI: '" + value + "'");
  }

  static bool is_valid(const std::string& s) {
    if (s.size() != 8 || s[0] != 'C') return false;
    for (std::size_t i = 1; i < 8; ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
  }

  auto operator<=>(const ConceptId&) const = default;
};

enum class Medium { Text, Image };

inline const char* medium_name(Medium m) { return m == Medium::Text ? "text" : "image"; }

namespace detail {
inline void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
}
}  // namespace detail

// Composed concept weight: the product of the four per-concept factors.
inline double compute_lambda(double mu, double nu, double omega, double phi) {
  detail::check_unit(mu, "mu");
  detail::check_unit(nu, "nu");
  detail::check_unit(omega, "omega");
  detail::check_unit(phi, "phi");
  return mu * nu * omega * phi;
}

// One concept with its weighting factors. lambda is mu*nu*omega*phi at
// construction; alignment later overwrites lambda as the authoritative score.
struct WeightedConcept {
  ConceptId cui;
  double mu = 1.0;
  double nu = 1.0;
  double omega = 1.0;
  double phi = 1.0;
  double lambda = 1.0;

  WeightedConcept() = default;
  WeightedConcept(ConceptId id, double mu_, double nu_, double omega_, double phi_)
      : cui(std::move(id)), mu(mu_), nu(nu_), omega(omega_), phi(phi_),
        lambda(compute_lambda(mu_, nu_, omega_, phi_)) {}
};

struct MediaIndex {
  Medium medium = Medium::Text;
  std::vector<WeightedConcept> concepts;  // no duplicate cui; merged at ingest
};

// One medical report paired with one of its images.
struct ElementaryCase {
  std::string case_id;
  MediaIndex text_index;   // medium == Text
  MediaIndex image_index;  // medium == Image
  std::string image_ref;   // opaque, carried for display/output only
};

enum class Provenance { TextOnly, ImageOnly, Fused };

inline const char* provenance_code(Provenance p) {
  switch (p) {
    case Provenance::TextOnly: return "t";
    case Provenance::ImageOnly: return "i";
    default: return "f";
  }
}

struct FusedEntry {
  double score = 0.0;
  Provenance provenance = Provenance::TextOnly;
};

// Sparse per-case dictionary: concept id -> fused score with provenance.
struct FusedCase {
  std::string case_id;
  std::map<ConceptId, FusedEntry> entries;
};

// Pair the full report index with each image index in turn.
// Case ids are `<base>#k`, k the 1-based image position.
inline std::vector<ElementaryCase> decompose_case(
    const MediaIndex& report_index,
    const std::vector<std::pair<std::string, MediaIndex>>& image_indexes,
    const std::string& case_id_base) {
  if (report_index.medium != Medium::Text)
    throw DomainError("decompose_case: report index must have medium text");
  if (case_id_base.find('#') != std::string::npos)
    throw DomainError("decompose_case: '#' is reserved in case ids: '" + case_id_base + "'");
  std::vector<ElementaryCase> out;
  out.reserve(image_indexes.size());
  std::size_t k = 0;
  for (const auto& [ref, idx] : image_indexes) {
    if (idx.medium != Medium::Image)
      throw DomainError("decompose_case: image index must have medium image");
    ++k;
    ElementaryCase c;
    c.case_id = case_id_base + "#" + std::to_string(k);
    c.text_index = report_index;
    c.image_index = idx;
    c.image_ref = ref;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace cfuse

#endif
