#pragma once

// Command-line front end: subcommand dispatch, JSON output, and the
// batch/golden regression harness. Header-only so the binary and the test
// suite drive the exact same code path through run_argv.
//
// Output contract: one JSON value (or its text rendering) per invocation on
// stdout, byte-deterministic for fixed inputs. Exit codes: 0 success, 1
// domain error (stdout carries {"error": code, "detail": ...}), 2 usage.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "kms/demazure.hpp"
#include "kms/json_io.hpp"

namespace kmscli {

using kms::KmsError;
using kms::OrderedJson;

struct UsageError {
  std::string detail;
};

// ---------------------------------------------------------------------------
// small plumbing

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw KmsError("io_error", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline OrderedJson parse_json_text(const std::string& text, const std::string& what) {
  try {
    return OrderedJson::parse(text);
  } catch (const OrderedJson::parse_error& e) {
    throw KmsError("bad_input", what + " is not valid JSON: " + e.what());
  }
}

// values may be inline JSON or "file:PATH"
inline OrderedJson json_arg(const std::string& arg, const std::string& what) {
  if (arg.rfind("file:", 0) == 0) return parse_json_text(read_file(arg.substr(5)), what);
  return parse_json_text(arg, what);
}

inline void render_text(std::ostream& out, const OrderedJson& j, const std::string& prefix) {
  if (j.is_object() && !(j.empty() && !prefix.empty())) {
    for (const auto& [k, v] : j.items())
      render_text(out, v, prefix.empty() ? k : prefix + "." + k);
    return;
  }
  if (prefix.empty()) {
    out << j.dump() << "\n";
  } else if (j.is_string()) {
    out << prefix << ": " << j.get<std::string>() << "\n";
  } else {
    out << prefix << ": " << j.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// session: global flags, datum loaded lazily and validated on load

struct Session {
  std::string datum_path;
  std::int64_t bound = 3;
  std::string format = "json";
  std::uint64_t seed = 0;
  std::int64_t rank_flag = 0;  // 0 = unset
  mutable std::optional<kms::RootDatum> loaded;

  const kms::RootDatum& need_datum() const {
    if (!loaded) {
      if (datum_path.empty()) throw UsageError{"this subcommand requires --datum FILE"};
      loaded = kms::datum_from_json(parse_json_text(read_file(datum_path), "root datum"));
      kms::require_valid(*loaded);
    }
    return *loaded;
  }

  void emit(std::ostream& out, const OrderedJson& j) const {
    if (format == "text")
      render_text(out, j, "");
    else
      out << j.dump() << "\n";
  }
};

inline std::size_t gen_of(const kms::RootDatum& d, const std::string& g) {
  for (std::size_t i = 0; i < d.gens.size(); ++i)
    if (d.gens[i] == g) return i;
  try {
    std::size_t pos = 0;
    unsigned long v = std::stoul(g, &pos);
    if (pos == g.size() && v < d.num_gens()) return v;
  } catch (const std::exception&) {
  }
  throw KmsError("bad_input", "unknown generator '" + g + "'");
}

inline std::size_t poly_rank_hint(const OrderedJson& j) {
  if (j.is_object() && j.contains("terms") && j["terms"].is_array() && !j["terms"].empty() &&
      j["terms"][0].is_object() && j["terms"][0].contains("exp") &&
      j["terms"][0]["exp"].is_array())
    return j["terms"][0]["exp"].size();
  return static_cast<std::size_t>(-1);
}

inline std::size_t resolve_rank(const Session& s,
                                std::initializer_list<const OrderedJson*> operands) {
  if (s.rank_flag > 0) return static_cast<std::size_t>(s.rank_flag);
  if (!s.datum_path.empty()) return s.need_datum().rank();
  for (const OrderedJson* op : operands) {
    std::size_t r = poly_rank_hint(*op);
    if (r != static_cast<std::size_t>(-1)) return r;
  }
  throw UsageError{"cannot infer the lattice rank; pass --rank N or --datum FILE"};
}

// ---------------------------------------------------------------------------
// complex expressions: TERM (* TERM)* with
//   TERM = unit | delta:WORD | nabla:WORD | file:PATH

inline std::string trimmed(std::string s) {
  const auto sp = [](unsigned char c) { return c == ' ' || c == '\t'; };
  while (!s.empty() && sp(s.front())) s.erase(s.begin());
  while (!s.empty() && sp(s.back())) s.pop_back();
  return s;
}

inline kms::ChainComplex complex_term(const kms::SBimContext& ctx, const std::string& raw) {
  std::string term = trimmed(raw);
  if (term == "unit") return kms::unit_complex(ctx);
  if (term.rfind("delta:", 0) == 0)
    return kms::rouquier_deltas(ctx, kms::word_from_csv(ctx.datum(), term.substr(6)));
  if (term.rfind("nabla:", 0) == 0)
    return kms::rouquier_nablas(ctx, kms::word_from_csv(ctx.datum(), term.substr(6)));
  if (term.rfind("file:", 0) == 0)
    return kms::complex_from_json(ctx, parse_json_text(read_file(term.substr(5)), "complex"));
  throw KmsError("bad_input",
                 "complex term must be unit, delta:WORD, nabla:WORD, or file:PATH; got '" +
                     term + "'");
}

inline kms::ChainComplex complex_expr(const kms::SBimContext& ctx, const std::string& expr) {
  std::vector<std::string> terms;
  std::size_t start = 0;
  for (;;) {
    std::size_t star = expr.find('*', start);
    terms.push_back(expr.substr(start, star == std::string::npos ? star : star - start));
    if (star == std::string::npos) break;
    start = star + 1;
  }
  kms::ChainComplex c = complex_term(ctx, terms.front());
  for (std::size_t i = 1; i < terms.size(); ++i)
    c = kms::tensor_complex(ctx, c, complex_term(ctx, terms[i]));
  return c;
}

// ---------------------------------------------------------------------------
// batch harness

int run_argv(std::vector<std::string> args, std::ostream& out);

// whitespace split with double-quote grouping and backslash escapes;
// '#' starts a comment
inline std::vector<std::string> tokenize_command(const std::string& line) {
  std::vector<std::string> tokens;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size()) {
      cur += line[++i];
      any = true;
      continue;
    }
    if (quoted) {
      if (c == '"')
        quoted = false;
      else
        cur += c;
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == '#') {
      break;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      if (any) tokens.push_back(cur);
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw KmsError("bad_input", "unterminated quote in batch line: " + line);
  if (any) tokens.push_back(cur);
  return tokens;
}

inline std::string batch_case_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%03zu", index);
  return buf;
}

inline int run_batch(const std::string& file, const std::string& golden_dir, bool update,
                     unsigned threads, std::ostream& out) {
  std::istringstream lines(read_file(file));
  std::vector<std::vector<std::string>> cases;
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::string> tokens = tokenize_command(line);
    if (!tokens.empty()) cases.push_back(std::move(tokens));
  }

  std::vector<std::pair<int, std::string>> results(cases.size());
  if (threads == 0) threads = 1;
  for (std::size_t base = 0; base < cases.size(); base += threads) {
    const std::size_t wave = std::min<std::size_t>(threads, cases.size() - base);
    std::vector<std::future<std::pair<int, std::string>>> futs;
    futs.reserve(wave);
    for (std::size_t i = 0; i < wave; ++i)
      futs.push_back(std::async(std::launch::async, [tokens = cases[base + i]]() {
        std::ostringstream oss;
        int code = run_argv(tokens, oss);
        return std::make_pair(code, oss.str());
      }));
    for (std::size_t i = 0; i < wave; ++i) results[base + i] = futs[i].get();
  }

  std::size_t failures = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const std::string name = batch_case_name(i + 1);
    const std::string path = golden_dir + "/" + name + ".txt";
    const std::string record =
        "exit " + std::to_string(results[i].first) + "\n" + results[i].second;
    if (update) {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw KmsError("io_error", "cannot write '" + path + "'");
      f << record;
      out << "wrote " << name << "\n";
      continue;
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) {
      out << "FAIL " << name << ": missing fixture " << path << "\n";
      ++failures;
      continue;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    if (ss.str() == record) {
      out << "ok " << name << "\n";
    } else {
      ++failures;
      out << "FAIL " << name << ": output differs\n";
      out << "--- expected (" << ss.str().size() << " bytes)\n" << ss.str();
      out << "--- actual (" << record.size() << " bytes)\n" << record;
      out << "--- end\n";
    }
  }
  if (update)
    out << "updated " << cases.size() << " fixtures\n";
  else
    out << (cases.size() - failures) << " of " << cases.size() << " cases match\n";
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// dispatch

inline int run_argv(std::vector<std::string> args, std::ostream& out) {
  Session session;
  std::optional<OrderedJson> result;
  int exit_code = 0;

  try {
    CLI::App app{"exact Soergel bimodule calculus over Kac-Moody root data", "kms"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--datum", session.datum_path, "root datum JSON file");
    app.add_option("--bound", session.bound,
                   "support bound per coordinate for bounded searches")
        ->envname("KMSOERGEL_BOUND")
        ->default_val(3);
    app.add_option("--format", session.format, "output format")
        ->check(CLI::IsMember({"json", "text"}))
        ->default_val("json");
    app.add_option("--seed", session.seed, "seed for randomized demos (unused by "
                                           "deterministic subcommands)");
    app.add_option("--rank", session.rank_flag,
                   "lattice rank for ring subcommands without --datum");

    // ---- datum ----------------------------------------------------------
    auto* datum_cmd = app.add_subcommand("datum", "root datum operations");
    datum_cmd->require_subcommand(1);
    std::string datum_file, affinize_mode_name = "loop_rotation";
    std::int64_t affinize_cap = 10000;

    auto load_datum_file = [&]() {
      kms::RootDatum d =
          kms::datum_from_json(parse_json_text(read_file(datum_file), "root datum"));
      return d;
    };

    auto* d_validate = datum_cmd->add_subcommand("validate", "check the GCM axioms");
    d_validate->add_option("file", datum_file, "datum JSON file")->required();
    d_validate->callback([&] {
      std::vector<std::string> bad = kms::validate(load_datum_file());
      OrderedJson j;
      j["ok"] = bad.empty();
      if (!bad.empty()) j["violations"] = bad;
      result = std::move(j);
    });

    auto* d_classify = datum_cmd->add_subcommand(
        "classify", "free/cofree and simply-connected/adjoint classification");
    d_classify->add_option("file", datum_file, "datum JSON file")->required();
    d_classify->callback([&] {
      kms::DatumClassification c = kms::classify(load_datum_file());
      OrderedJson j;
      j["free"] = c.free;
      j["cofree"] = c.cofree;
      j["sc_type"] = c.sc_type;
      j["adjoint_type"] = c.adjoint_type;
      j["sc_at"] = c.sc_at;
      j["adjoint_at"] = c.adjoint_at;
      result = std::move(j);
    });

    auto* d_dual = datum_cmd->add_subcommand("dual", "Langlands dual datum");
    d_dual->add_option("file", datum_file, "datum JSON file")->required();
    d_dual->callback([&] { result = kms::datum_to_json(kms::langlands_dual(load_datum_file())); });

    auto* d_affinize = datum_cmd->add_subcommand("affinize", "attach the affine node");
    d_affinize->add_option("file", datum_file, "datum JSON file")->required();
    d_affinize->add_option("--mode", affinize_mode_name,
                           "loop | loop_rotation | central_extension");
    d_affinize->add_option("--cap", affinize_cap, "positive-root enumeration cap");
    d_affinize->callback([&] {
      kms::RootDatum d = load_datum_file();
      kms::require_valid(d);
      result = kms::datum_to_json(kms::affinize(
          d, kms::affinize_mode_from_string(affinize_mode_name),
          static_cast<std::size_t>(affinize_cap)));
    });

    // ---- weyl -----------------------------------------------------------
    auto* weyl_cmd = app.add_subcommand("weyl", "Weyl group operations (needs --datum)");
    weyl_cmd->require_subcommand(1);
    std::string word_csv, left_csv, right_csv;
    std::int64_t max_len = 3;

    auto weyl_word_json = [&](const kms::WeylGroup& w, const kms::WeylElement& x) {
      OrderedJson j;
      j["word"] = kms::word_to_json(w.datum(), x.word);
      j["length"] = x.length();
      return j;
    };

    auto* w_reduce = weyl_cmd->add_subcommand("reduce", "canonical reduced word");
    w_reduce->add_option("--word", word_csv, "comma-joined generator names")->required();
    w_reduce->callback([&] {
      kms::WeylGroup w(session.need_datum());
      result = weyl_word_json(w, w.from_word(kms::word_from_csv(w.datum(), word_csv)));
    });

    auto* w_mult = weyl_cmd->add_subcommand("mult", "product of two elements");
    w_mult->add_option("--left", left_csv, "left factor word")->required();
    w_mult->add_option("--right", right_csv, "right factor word")->required();
    w_mult->callback([&] {
      kms::WeylGroup w(session.need_datum());
      result = weyl_word_json(
          w, w.multiply(w.from_word(kms::word_from_csv(w.datum(), left_csv)),
                        w.from_word(kms::word_from_csv(w.datum(), right_csv))));
    });

    auto* w_length = weyl_cmd->add_subcommand("length", "Coxeter length");
    w_length->add_option("--word", word_csv, "word")->required();
    w_length->callback([&] {
      kms::WeylGroup w(session.need_datum());
      OrderedJson j;
      j["length"] = w.from_word(kms::word_from_csv(w.datum(), word_csv)).length();
      result = std::move(j);
    });

    auto* w_bruhat = weyl_cmd->add_subcommand("bruhat", "Bruhat order comparison x <= w");
    w_bruhat->add_option("--x", left_csv, "smaller candidate")->required();
    w_bruhat->add_option("--w", right_csv, "larger candidate")->required();
    w_bruhat->callback([&] {
      kms::WeylGroup w(session.need_datum());
      OrderedJson j;
      j["leq"] = w.bruhat_leq(w.from_word(kms::word_from_csv(w.datum(), left_csv)),
                              w.from_word(kms::word_from_csv(w.datum(), right_csv)));
      result = std::move(j);
    });

    auto* w_enum = weyl_cmd->add_subcommand("enum", "elements up to a length bound");
    w_enum->add_option("--max-length", max_len, "length bound")->required();
    w_enum->callback([&] {
      kms::WeylGroup w(session.need_datum());
      OrderedJson elems = OrderedJson::array();
      for (const kms::WeylElement& x : w.enumerate(static_cast<std::size_t>(max_len)))
        elems.push_back(kms::word_to_json(w.datum(), x.word));
      OrderedJson j;
      j["count"] = elems.size();
      j["elements"] = std::move(elems);
      result = std::move(j);
    });

    // ---- dem ------------------------------------------------------------
    auto* dem_cmd = app.add_subcommand("dem", "Demazure operators (needs --datum)");
    dem_cmd->require_subcommand(1);
    std::string gen_name, poly_arg;

    auto dem_ctx = [&]() {
      const kms::RootDatum& d = session.need_datum();
      return kms::make_demazure_context(d, gen_of(d, gen_name));
    };
    auto dem_poly = [&]() {
      return kms::poly_from_json(json_arg(poly_arg, "polynomial"),
                                 session.need_datum().rank());
    };

    auto* m_apply = dem_cmd->add_subcommand("apply", "Demazure operator D_s");
    m_apply->add_option("--gen", gen_name, "generator name")->required();
    m_apply->add_option("--poly", poly_arg, "polynomial JSON or file:PATH")->required();
    m_apply->callback(
        [&] { result = kms::poly_to_json(kms::demazure(dem_ctx(), dem_poly())); });

    auto* m_minus = dem_cmd->add_subcommand("minus", "complementary projector D_s^-");
    m_minus->add_option("--gen", gen_name, "generator name")->required();
    m_minus->add_option("--poly", poly_arg, "polynomial JSON or file:PATH")->required();
    m_minus->callback(
        [&] { result = kms::poly_to_json(kms::demazure_minus(dem_ctx(), dem_poly())); });

    auto* m_split = dem_cmd->add_subcommand(
        "split", "invariant splitting p = a + e^varpi b with a, b s-invariant");
    m_split->add_option("--gen", gen_name, "generator name")->required();
    m_split->add_option("--poly", poly_arg, "polynomial JSON or file:PATH")->required();
    m_split->callback([&] {
      auto [a, b] = kms::ps_split(dem_ctx(), dem_poly());
      OrderedJson j;
      j["a"] = kms::poly_to_json(a);
      j["b"] = kms::poly_to_json(b);
      result = std::move(j);
    });

    auto* m_inv = dem_cmd->add_subcommand("invariant", "s-invariance test");
    m_inv->add_option("--gen", gen_name, "generator name")->required();
    m_inv->add_option("--poly", poly_arg, "polynomial JSON or file:PATH")->required();
    m_inv->callback([&] {
      OrderedJson j;
      j["invariant"] = kms::is_invariant(dem_ctx(), dem_poly());
      result = std::move(j);
    });

    // ---- bim ------------------------------------------------------------
    auto* bim_cmd = app.add_subcommand("bim", "Bott-Samelson and standard bimodules "
                                              "(needs --datum)");
    bim_cmd->require_subcommand(1);
    std::string src_csv, tgt_csv;
    bool std_homs = false;

    auto* b_bs = bim_cmd->add_subcommand("bs", "Bott-Samelson object of a word");
    b_bs->add_option("--word", word_csv, "word")->required();
    b_bs->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      auto word = kms::word_from_csv(ctx.datum(), word_csv);
      OrderedJson j;
      j["word"] = kms::word_to_json(ctx.datum(), word);
      j["rank"] = kms::BimoduleObject::bs(word).basis_rank();
      result = std::move(j);
    });

    auto* b_tensor = bim_cmd->add_subcommand("tensor", "tensor product of two BS objects");
    b_tensor->add_option("--left", left_csv, "left word")->required();
    b_tensor->add_option("--right", right_csv, "right word")->required();
    b_tensor->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      kms::BimoduleObject t =
          kms::tensor(kms::BimoduleObject::bs(kms::word_from_csv(ctx.datum(), left_csv)),
                      kms::BimoduleObject::bs(kms::word_from_csv(ctx.datum(), right_csv)));
      OrderedJson j;
      j["word"] = kms::word_to_json(ctx.datum(), t.letters);
      j["rank"] = t.basis_rank();
      result = std::move(j);
    });

    auto* b_stdmult = bim_cmd->add_subcommand(
        "stdmult", "standard multiplicities of a Bott-Samelson word");
    b_stdmult->add_option("--word", word_csv, "word")->required();
    b_stdmult->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      auto mult = kms::std_multiplicities(ctx, kms::word_from_csv(ctx.datum(), word_csv));
      OrderedJson j = OrderedJson::object();
      for (const auto& [w, n] : mult) j[kms::weyl_key(ctx.datum(), w)] = n;
      result = std::move(j);
    });

    auto* b_hom = bim_cmd->add_subcommand(
        "hom", "bounded morphism space between BS words (or standards with --std)");
    b_hom->add_option("--src", src_csv, "source word")->required();
    b_hom->add_option("--tgt", tgt_csv, "target word")->required();
    b_hom->add_flag("--std", std_homs, "treat the words as standard-bimodule twists");
    b_hom->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      if (std_homs) {
        kms::HomStdResult r =
            kms::hom_std(ctx, ctx.weyl().from_word(kms::word_from_csv(ctx.datum(), src_csv)),
                         ctx.weyl().from_word(kms::word_from_csv(ctx.datum(), tgt_csv)));
        OrderedJson j;
        j["module_rank"] = r.module_rank;
        j["equal_words"] = r.equal_words;
        j["matrix_x_only"] = r.matrix_x_only;
        result = std::move(j);
      } else {
        kms::HomBasis hb = kms::hom_bounded(
            ctx, kms::BimSum(kms::BimoduleObject::bs(kms::word_from_csv(ctx.datum(), src_csv))),
            kms::BimSum(kms::BimoduleObject::bs(kms::word_from_csv(ctx.datum(), tgt_csv))),
            session.bound);
        OrderedJson j;
        j["dimension"] = hb.basis.size();
        j["bound"] = hb.bound;
        j["complete_within_bound"] = hb.complete_within_bound;
        result = std::move(j);
      }
    });

    auto* b_gr = bim_cmd->add_subcommand("grmap", "gr injection B_s -> R_e + R_s");
    b_gr->add_option("--gen", gen_name, "generator name")->required();
    b_gr->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      result = kms::morphism_to_json(ctx.datum(),
                                     kms::gr_map(ctx, gen_of(ctx.datum(), gen_name)));
    });

    auto* b_split = bim_cmd->add_subcommand(
        "bsbs-split", "projective-bundle splitting of B_s tensor B_s");
    b_split->add_option("--gen", gen_name, "generator name")->required();
    b_split->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      kms::SplitPair sp = kms::decompose_bsbs(ctx, gen_of(ctx.datum(), gen_name));
      OrderedJson j;
      j["forward"] = kms::morphism_to_json(ctx.datum(), sp.forward);
      j["backward"] = kms::morphism_to_json(ctx.datum(), sp.backward);
      result = std::move(j);
    });

    auto* b_central = bim_cmd->add_subcommand("central",
                                              "central element R -> B_s of the word (s)");
    b_central->add_option("--gen", gen_name, "generator name")->required();
    b_central->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      result = kms::morphism_to_json(
          ctx.datum(), kms::central_element(ctx, gen_of(ctx.datum(), gen_name)));
    });

    // ---- cx -------------------------------------------------------------
    auto* cx_cmd = app.add_subcommand("cx", "chain complexes (needs --datum)");
    cx_cmd->require_subcommand(1);
    std::string expr_arg, src_expr, tgt_expr, kind_name = "delta";

    auto* c_rouquier = cx_cmd->add_subcommand("rouquier", "standard or costandard complex");
    c_rouquier->add_option("--word", word_csv, "word")->required();
    c_rouquier->add_option("--kind", kind_name, "delta | nabla");
    c_rouquier->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      auto word = kms::word_from_csv(ctx.datum(), word_csv);
      if (kind_name != "delta" && kind_name != "nabla")
        throw KmsError("bad_input", "--kind must be delta or nabla");
      kms::ChainComplex c = kind_name == "delta" ? kms::rouquier_deltas(ctx, word)
                                                 : kms::rouquier_nablas(ctx, word);
      result = kms::complex_to_json(ctx.datum(), c);
    });

    auto* c_conv = cx_cmd->add_subcommand("conv", "convolution (tensor) of complexes");
    c_conv->add_option("expr", expr_arg,
                       "expression: TERM(*TERM)*, TERM = unit|delta:WORD|nabla:WORD|file:PATH")
        ->required();
    c_conv->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      result = kms::complex_to_json(ctx.datum(), complex_expr(ctx, expr_arg));
    });

    auto* c_min = cx_cmd->add_subcommand("minimize", "Gaussian elimination with certificate");
    c_min->add_option("expr", expr_arg, "complex expression")->required();
    c_min->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      kms::ChainComplex c = complex_expr(ctx, expr_arg);
      kms::MinimizationResult r = kms::gaussian_eliminate(ctx, c);
      OrderedJson j;
      j["minimized"] = kms::complex_to_json(ctx.datum(), r.minimized);
      j["certificate_verified"] = kms::verify_certificate(ctx, c, r.minimized, r.cert);
      result = std::move(j);
    });

    auto* c_unit = cx_cmd->add_subcommand("unit", "does the complex contract to the unit?");
    c_unit->add_option("expr", expr_arg, "complex expression")->required();
    c_unit->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      OrderedJson j;
      j["unit"] = kms::is_unit_complex(ctx, complex_expr(ctx, expr_arg));
      result = std::move(j);
    });

    auto* c_dual = cx_cmd->add_subcommand("dual", "duality (negates degrees)");
    c_dual->add_option("expr", expr_arg, "complex expression")->required();
    c_dual->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      result = kms::complex_to_json(ctx.datum(),
                                    kms::dualize_complex(ctx, complex_expr(ctx, expr_arg)));
    });

    auto* c_hom = cx_cmd->add_subcommand("hom", "bounded hom-complex homology ranks");
    c_hom->add_option("--src", src_expr, "source complex expression")->required();
    c_hom->add_option("--tgt", tgt_expr, "target complex expression")->required();
    c_hom->callback([&] {
      kms::SBimContext ctx(session.need_datum());
      kms::HomComplexReport r = kms::hom_complex(ctx, complex_expr(ctx, src_expr),
                                                 complex_expr(ctx, tgt_expr), session.bound);
      OrderedJson hom = OrderedJson::object();
      for (const auto& [k, n] : r.homology_rank) hom[std::to_string(k)] = n;
      OrderedJson j;
      j["bound"] = r.bound;
      j["complete_within_bound"] = r.complete_within_bound;
      j["homology"] = std::move(hom);
      result = std::move(j);
    });

    // ---- ring -----------------------------------------------------------
    auto* ring_cmd = app.add_subcommand("ring", "character ring arithmetic");
    ring_cmd->require_subcommand(1);
    std::string p_arg, q_arg, matrix_arg, lambda_arg;

    auto* r_mul = ring_cmd->add_subcommand("mul", "product of two ring elements");
    r_mul->add_option("--p", p_arg, "polynomial JSON or file:PATH")->required();
    r_mul->add_option("--q", q_arg, "polynomial JSON or file:PATH")->required();
    r_mul->callback([&] {
      OrderedJson pj = json_arg(p_arg, "p"), qj = json_arg(q_arg, "q");
      std::size_t rank = resolve_rank(session, {&pj, &qj});
      result = kms::poly_to_json(kms::poly_from_json(pj, rank) *
                                 kms::poly_from_json(qj, rank));
    });

    auto* r_div = ring_cmd->add_subcommand("div", "certified exact division");
    r_div->add_option("--p", p_arg, "dividend JSON or file:PATH")->required();
    r_div->add_option("--q", q_arg, "divisor JSON or file:PATH")->required();
    r_div->callback([&] {
      OrderedJson pj = json_arg(p_arg, "p"), qj = json_arg(q_arg, "q");
      std::size_t rank = resolve_rank(session, {&pj, &qj});
      auto quot = kms::divide_exact(kms::poly_from_json(pj, rank),
                                    kms::poly_from_json(qj, rank));
      if (!quot) throw KmsError("not_divisible", "the quotient does not exist in the ring");
      result = kms::poly_to_json(*quot);
    });

    auto* r_snf = ring_cmd->add_subcommand("snf", "Smith normal form U*A*V = D");
    r_snf->add_option("--matrix", matrix_arg, "integer matrix JSON or file:PATH")->required();
    r_snf->callback([&] {
      kms::IntMat a = kms::intmat_from_json(json_arg(matrix_arg, "matrix"));
      kms::SmithForm s = kms::smith_normal_form(a);
      OrderedJson j;
      j["U"] = kms::intmat_to_json(s.U);
      j["D"] = kms::intmat_to_json(s.D);
      j["V"] = kms::intmat_to_json(s.V);
      result = std::move(j);
    });

    auto* r_reduced = ring_cmd->add_subcommand(
        "reduced", "reducedness and structure of R/(1 - e^lambda)");
    r_reduced->add_option("--lambda", lambda_arg, "weight: comma-joined integers or JSON array")
        ->required();
    r_reduced->callback([&] {
      kms::LatticePoint lambda;
      if (!lambda_arg.empty() && (lambda_arg[0] == '[' || lambda_arg.rfind("file:", 0) == 0)) {
        lambda = json_arg(lambda_arg, "lambda").get<kms::LatticePoint>();
      } else {
        std::istringstream ss(lambda_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
          try {
            lambda.push_back(std::stoll(trimmed(tok)));
          } catch (const std::exception&) {
            throw KmsError("bad_input", "bad weight coordinate '" + tok + "'");
          }
      }
      std::size_t rank = session.rank_flag > 0 ? static_cast<std::size_t>(session.rank_flag)
                         : !session.datum_path.empty() ? session.need_datum().rank()
                                                       : lambda.size();
      kms::QuotientInfo info = kms::quotient_is_reduced(rank, lambda);
      OrderedJson j;
      j["reduced"] = info.reduced;
      j["torsion"] = kms::mpz_to_json(info.torsion);
      j["free_rank"] = info.free_rank;
      result = std::move(j);
    });

    // ---- batch ----------------------------------------------------------
    auto* batch_cmd = app.add_subcommand("batch", "run a command list against fixtures");
    std::string batch_file, golden_dir;
    bool batch_update = false;
    unsigned batch_threads = 1;
    batch_cmd->add_option("file", batch_file, "command list, one invocation per line")
        ->required();
    batch_cmd->add_option("--golden", golden_dir, "fixture directory")->required();
    batch_cmd->add_flag("--update", batch_update, "rewrite fixtures from current output");
    batch_cmd->add_option("--threads", batch_threads, "parallel workers");
    batch_cmd->callback(
        [&] { exit_code = run_batch(batch_file, golden_dir, batch_update, batch_threads, out); });

    try {
      std::reverse(args.begin(), args.end());
      app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
      app.exit(e, out, out);
      return 0;
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, out);
      return 2;
    }

    if (result) session.emit(out, *result);
    return exit_code;
  } catch (const UsageError& e) {
    OrderedJson j;
    j["error"] = "usage";
    j["detail"] = e.detail;
    out << j.dump() << "\n";
    return 2;
  } catch (const KmsError& e) {
    OrderedJson j;
    j["error"] = e.code;
    j["detail"] = e.what();
    out << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    OrderedJson j;
    j["error"] = "internal";
    j["detail"] = e.what();
    out << j.dump() << "\n";
    return 1;
  }
}

}  // namespace kmscli
