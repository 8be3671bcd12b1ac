#pragma once

// JSON encoding and decoding for every value the command-line tool exchanges:
// Laurent polynomials, root data, words, bimodule objects and morphisms, and
// chain complexes. Key order is fixed (insertion order via ordered_json) and
// map-backed containers iterate in their canonical order, so serialization is
// byte-deterministic. Every emitted value is accepted back by its parser.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kms/bimodule.hpp"
#include "kms/complex.hpp"
#include "kms/error.hpp"
#include "kms/intmat.hpp"
#include "kms/laurent.hpp"
#include "kms/root_datum.hpp"
#include "kms/weyl.hpp"

namespace kms {

using OrderedJson = nlohmann::ordered_json;

// --------------------------------------------------------------------------
// integers: JSON numbers while they fit in 64 bits, decimal strings beyond

inline OrderedJson mpz_to_json(const mpz_class& z) {
  if (z.fits_slong_p()) return static_cast<std::int64_t>(z.get_si());
  return z.get_str();
}

inline mpz_class mpz_from_json(const OrderedJson& j) {
  if (j.is_number_integer()) return mpz_class(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) {
    try {
      return mpz_class(j.get<std::string>());
    } catch (const std::invalid_argument&) {
      throw KmsError("bad_input", "not a decimal integer: " + j.get<std::string>());
    }
  }
  throw KmsError("bad_input", "expected an integer or a decimal string");
}

inline OrderedJson intmat_to_json(const IntMat& m) {
  OrderedJson rows = OrderedJson::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    OrderedJson row = OrderedJson::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(mpz_to_json(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline IntMat intmat_from_json(const OrderedJson& j) {
  if (!j.is_array()) throw KmsError("bad_input", "matrix must be an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (const auto& row : j) {
    if (!row.is_array()) throw KmsError("bad_input", "matrix row must be an array");
    cols = std::max(cols, row.size());
  }
  for (const auto& row : j)
    if (row.size() != cols) throw KmsError("bad_input", "ragged matrix rows");
  IntMat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < cols; ++c) m.at(i, c) = mpz_from_json(j[i][c]);
  return m;
}

// --------------------------------------------------------------------------
// Laurent polynomials: {"terms": [{"exp": [..], "coeff": n}, ..]}, terms in
// lexicographic exponent order (the term map's own order)

inline OrderedJson poly_to_json(const LaurentPoly& p) {
  OrderedJson terms = OrderedJson::array();
  for (const auto& [e, c] : p.terms) {
    OrderedJson t;
    t["exp"] = e;
    t["coeff"] = mpz_to_json(c);
    terms.push_back(std::move(t));
  }
  OrderedJson j;
  j["terms"] = std::move(terms);
  return j;
}

inline LaurentPoly poly_from_json(const OrderedJson& j, std::size_t rank) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw KmsError("bad_input", "polynomial must be {\"terms\": [...]}");
  LaurentPoly p(rank);
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("exp") || !t.contains("coeff"))
      throw KmsError("bad_input", "polynomial term needs \"exp\" and \"coeff\"");
    const auto& ej = t["exp"];
    if (!ej.is_array() || ej.size() != rank)
      throw KmsError("bad_input", "term exponent length != lattice rank " +
                                      std::to_string(rank));
    LatticePoint e(rank);
    for (std::size_t i = 0; i < rank; ++i) e[i] = ej[i].get<std::int64_t>();
    p.add_term(e, mpz_from_json(t["coeff"]));
  }
  return p;
}

// --------------------------------------------------------------------------
// root data

inline OrderedJson datum_to_json(const RootDatum& d) {
  OrderedJson j;
  j["rank"] = d.rank();
  j["generators"] = d.gens;
  j["simple_roots"] = d.simple_roots;
  j["simple_coroots"] = d.simple_coroots;
  return j;
}

inline RootDatum datum_from_json(const OrderedJson& j) {
  for (const char* key : {"rank", "generators", "simple_roots", "simple_coroots"})
    if (!j.contains(key))
      throw KmsError("bad_input", std::string("root datum file missing \"") + key + "\"");
  const std::size_t rank = j["rank"].get<std::size_t>();
  std::vector<std::string> gens = j["generators"].get<std::vector<std::string>>();
  auto points = [&](const OrderedJson& arr, const char* what) {
    std::vector<LatticePoint> out;
    for (const auto& row : arr) {
      LatticePoint p = row.get<LatticePoint>();
      if (p.size() != rank)
        throw KmsError("bad_input", std::string(what) + " length != rank");
      out.push_back(std::move(p));
    }
    return out;
  };
  std::vector<LatticePoint> roots = points(j["simple_roots"], "simple root");
  std::vector<LatticePoint> coroots = points(j["simple_coroots"], "simple coroot");
  if (roots.size() != gens.size() || coroots.size() != gens.size())
    throw KmsError("bad_input", "generator/root/coroot counts disagree");
  return RootDatum(Lattice(rank), std::move(gens), std::move(roots), std::move(coroots));
}

// --------------------------------------------------------------------------
// words: arrays of generator names in JSON, comma-joined on the command line,
// the identity written "e"

inline std::vector<std::size_t> word_from_csv(const RootDatum& d, const std::string& csv) {
  std::vector<std::size_t> word;
  if (csv.empty() || csv == "e") return word;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    std::string tok = csv.substr(start, comma == std::string::npos ? comma : comma - start);
    if (tok.empty()) throw KmsError("bad_input", "empty letter in word '" + csv + "'");
    word.push_back(d.gen_index(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return word;
}

inline OrderedJson word_to_json(const RootDatum& d, const std::vector<std::size_t>& w) {
  OrderedJson arr = OrderedJson::array();
  for (std::size_t s : w) arr.push_back(d.gens.at(s));
  return arr;
}

inline std::string weyl_key(const RootDatum& d, const WeylElement& w) {
  if (w.word.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.word.size(); ++i) {
    if (i) out += ',';
    out += d.gens.at(w.word[i]);
  }
  return out;
}

inline std::vector<std::size_t> word_from_json(const RootDatum& d, const OrderedJson& j) {
  std::vector<std::size_t> word;
  for (const auto& g : j) word.push_back(d.gen_index(g.get<std::string>()));
  return word;
}

// --------------------------------------------------------------------------
// bimodule objects, sums, morphisms

inline OrderedJson object_to_json(const RootDatum& d, const BimoduleObject& o) {
  OrderedJson j;
  if (o.kind == BimoduleObject::Kind::BS)
    j["word"] = word_to_json(d, o.letters);
  else
    j["twist"] = word_to_json(d, o.twist.word);
  return j;
}

inline BimoduleObject object_from_json(const WeylGroup& w, const OrderedJson& j) {
  const RootDatum& d = w.datum();
  if (j.contains("word")) return BimoduleObject::bs(word_from_json(d, j["word"]));
  if (j.contains("twist"))
    return BimoduleObject::std_twist(w.from_word(word_from_json(d, j["twist"])));
  throw KmsError("bad_input", "bimodule object needs \"word\" or \"twist\"");
}

inline OrderedJson sum_to_json(const RootDatum& d, const BimSum& s) {
  OrderedJson parts = OrderedJson::array();
  for (const auto& p : s.parts) parts.push_back(object_to_json(d, p));
  OrderedJson j;
  j["parts"] = std::move(parts);
  return j;
}

inline BimSum sum_from_json(const WeylGroup& w, const OrderedJson& j) {
  const OrderedJson& arr = j.is_object() && j.contains("parts") ? j["parts"] : j;
  if (!arr.is_array()) throw KmsError("bad_input", "bimodule sum must be a list of parts");
  std::vector<BimoduleObject> parts;
  for (const auto& p : arr) parts.push_back(object_from_json(w, p));
  return BimSum(std::move(parts));
}

inline OrderedJson rmatrix_to_json(const RMatrix& m) {
  OrderedJson rows = OrderedJson::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    OrderedJson row = OrderedJson::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(poly_to_json(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RMatrix rmatrix_from_json(const OrderedJson& j, std::size_t rows, std::size_t cols,
                                 std::size_t rank) {
  if (!j.is_array() || j.size() != rows)
    throw KmsError("bad_input", "matrix row count mismatch");
  RMatrix m(rows, cols, rank);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw KmsError("bad_input", "matrix column count mismatch");
    for (std::size_t c = 0; c < cols; ++c) {
      LaurentPoly p = poly_from_json(j[i][c], rank);
      if (!p.is_zero()) m.at(i, c) = std::move(p);
    }
  }
  return m;
}

inline OrderedJson morphism_to_json(const RootDatum& d, const BimMorphism& f) {
  OrderedJson j;
  j["src"] = sum_to_json(d, f.src);
  j["tgt"] = sum_to_json(d, f.tgt);
  j["matrix"] = rmatrix_to_json(f.mat);
  return j;
}

inline BimMorphism morphism_from_json(const SBimContext& ctx, const OrderedJson& j) {
  if (!j.contains("src") || !j.contains("tgt") || !j.contains("matrix"))
    throw KmsError("bad_input", "morphism needs \"src\", \"tgt\", \"matrix\"");
  BimSum src = sum_from_json(ctx.weyl(), j["src"]);
  BimSum tgt = sum_from_json(ctx.weyl(), j["tgt"]);
  RMatrix m = rmatrix_from_json(j["matrix"], tgt.total_rank(), src.total_rank(), ctx.rank());
  try {
    return make_morphism(ctx, std::move(src), std::move(tgt), std::move(m), true);
  } catch (const KmsError&) {
    throw KmsError("bad_input", "matrix is not a bimodule morphism");
  }
}

// --------------------------------------------------------------------------
// chain complexes: {"degrees": {"k": [object, ..]}, "differentials": {"k": M}}
// with differentials keyed by their source degree

inline OrderedJson complex_to_json(const RootDatum& d, const ChainComplex& c) {
  OrderedJson degs = OrderedJson::object();
  for (const auto& [k, s] : c.objects) {
    OrderedJson parts = OrderedJson::array();
    for (const auto& p : s.parts) parts.push_back(object_to_json(d, p));
    degs[std::to_string(k)] = std::move(parts);
  }
  OrderedJson diffs = OrderedJson::object();
  for (const auto& [k, f] : c.diffs) diffs[std::to_string(k)] = rmatrix_to_json(f.mat);
  OrderedJson j;
  j["degrees"] = std::move(degs);
  j["differentials"] = std::move(diffs);
  return j;
}

inline int degree_key(const std::string& s) {
  try {
    std::size_t pos = 0;
    int k = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return k;
  } catch (const std::exception&) {
    throw KmsError("bad_input", "degree key is not an integer: '" + s + "'");
  }
}

inline ChainComplex complex_from_json(const SBimContext& ctx, const OrderedJson& j) {
  if (!j.is_object() || !j.contains("degrees"))
    throw KmsError("bad_input", "complex needs a \"degrees\" object");
  std::map<int, BimSum> objects;
  for (const auto& [key, parts] : j["degrees"].items()) {
    BimSum s = sum_from_json(ctx.weyl(), parts);
    if (!s.parts.empty()) objects[degree_key(key)] = std::move(s);
  }
  std::map<int, BimMorphism> diffs;
  if (j.contains("differentials"))
    for (const auto& [key, mj] : j["differentials"].items()) {
      int k = degree_key(key);
      auto src = objects.find(k);
      auto tgt = objects.find(k + 1);
      if (src == objects.end() || tgt == objects.end())
        throw KmsError("bad_input", "differential at degree " + key +
                                        " has no endpoints in \"degrees\"");
      RMatrix m = rmatrix_from_json(mj, tgt->second.total_rank(), src->second.total_rank(),
                                    ctx.rank());
      try {
        diffs.emplace(k, make_morphism(ctx, src->second, tgt->second, std::move(m), true));
      } catch (const KmsError&) {
        throw KmsError("bad_input",
                       "differential at degree " + key + " is not a bimodule morphism");
      }
    }
  try {
    return make_complex(ctx, std::move(objects), std::move(diffs), true);
  } catch (const std::logic_error& e) {
    throw KmsError("bad_input", std::string("invalid complex: ") + e.what());
  }
}

}  // namespace kms
