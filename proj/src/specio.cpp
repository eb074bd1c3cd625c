#include "spb/specio.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace spb::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void check_fields(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(where + "." + it.key(), "unknown field");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or_inf(const json& j, const std::string& where) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    fail(where, "expected a number or \"inf\"");
  }
  return number(j, where);
}

const json& required(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where, "missing field \"" + key + "\"");
  return *it;
}

Domain parse_support(const json& j, const std::string& where) {
  check_fields(j, where, {"lo", "hi"});
  double lo = number_or_inf(required(j, "lo", where), where + ".lo");
  double hi = number_or_inf(required(j, "hi", where), where + ".hi");
  if (!(lo < hi)) fail(where, "lo must be < hi");
  return Domain(lo, hi);
}

PiecewiseFunction parse_pieces(const json& arr, const Domain& support,
                               const std::string& where) {
  if (!arr.is_array() || arr.empty()) fail(where, "expected a non-empty array");
  std::vector<double> breaks;
  std::vector<Polynomial> polys;
  double cursor = support.lower;
  for (size_t i = 0; i < arr.size(); ++i) {
    std::string pw = where + "[" + std::to_string(i) + "]";
    check_fields(arr[i], pw, {"interval", "coeffs"});
    const json& iv = required(arr[i], "interval", pw);
    if (!iv.is_array() || iv.size() != 2) fail(pw + ".interval", "expected [lo, hi]");
    double a = number_or_inf(iv[0], pw + ".interval[0]");
    double b = number_or_inf(iv[1], pw + ".interval[1]");
    if (std::abs(a - cursor) > 1e-12 * (1.0 + std::abs(cursor)) &&
        !(std::isinf(a) && std::isinf(cursor) && a == cursor))
      fail(pw + ".interval", "pieces must tile the support without gaps");
    const json& cj = required(arr[i], "coeffs", pw);
    if (!cj.is_array()) fail(pw + ".coeffs", "expected an array");
    std::vector<double> coeffs;
    for (size_t k = 0; k < cj.size(); ++k)
      coeffs.push_back(number(cj[k], pw + ".coeffs[" + std::to_string(k) + "]"));
    polys.emplace_back(coeffs);
    if (i + 1 < arr.size()) breaks.push_back(b);
    cursor = b;
  }
  if (std::abs(cursor - support.upper) > 1e-12 * (1.0 + std::abs(support.upper)) &&
      !(std::isinf(cursor) && std::isinf(support.upper) && cursor == support.upper))
    fail(where, "pieces must end at the support upper bound");
  return PiecewiseFunction::from_poly_pieces(support, std::move(breaks), std::move(polys));
}

PiecewiseFunction parse_function(const json& j, const Domain& support,
                                 const std::string& where) {
  check_fields(j, where, {"call", "coinsurance", "variance", "monomial", "pieces"});
  if (j.size() != 1) fail(where, "expected exactly one of call/coinsurance/variance/monomial/pieces");
  if (j.contains("call")) {
    const json& c = j["call"];
    check_fields(c, where + ".call", {"d"});
    return PiecewiseFunction::call_payoff(support,
                                          number(required(c, "d", where), where + ".call.d"));
  }
  if (j.contains("coinsurance")) {
    const json& c = j["coinsurance"];
    check_fields(c, where + ".coinsurance", {"d", "u", "gamma"});
    std::string cw = where + ".coinsurance";
    return coinsurance_payoff(number(required(c, "d", cw), cw + ".d"),
                              number(required(c, "u", cw), cw + ".u"),
                              number(required(c, "gamma", cw), cw + ".gamma"), support);
  }
  if (j.contains("variance")) {
    const json& c = j["variance"];
    check_fields(c, where + ".variance", {"mu"});
    double mu = number(required(c, "mu", where), where + ".variance.mu");
    return PiecewiseFunction::from_polynomial(support, Polynomial({mu * mu, -2.0 * mu, 1.0}));
  }
  if (j.contains("monomial")) {
    const json& c = j["monomial"];
    check_fields(c, where + ".monomial", {"degree", "coeff"});
    const json& dj = required(c, "degree", where + ".monomial");
    if (!dj.is_number_integer() || dj.get<int>() < 0)
      fail(where + ".monomial.degree", "expected a non-negative integer");
    PiecewiseFunction f = PiecewiseFunction::monomial(support, dj.get<int>());
    if (c.contains("coeff")) f = f.scaled(number(c["coeff"], where + ".monomial.coeff"));
    return f;
  }
  return parse_pieces(j["pieces"], support, where + ".pieces");
}

MixtureFamily parse_family(const json& j, const std::string& where) {
  check_fields(j, where, {"variant", "m", "alpha", "eta"});
  const json& vj = required(j, "variant", where);
  if (!vj.is_string()) fail(where + ".variant", "expected a string");
  std::string v = vj.get<std::string>();
  auto want = [&](std::initializer_list<const char*> keys) {
    std::set<std::string> ok = {"variant"};
    for (const char* k : keys) ok.insert(k);
    check_fields(j, where, ok);
    for (const char* k : keys)
      if (!j.contains(k)) fail(where, std::string("family \"") + v + "\" needs \"" + k + "\"");
  };
  if (v == "dirac") {
    want({});
    return MixtureFamily::dirac();
  }
  if (v == "uniform_zero") {
    want({});
    return MixtureFamily::uniform_zero();
  }
  if (v == "khintchine") {
    want({"m"});
    return MixtureFamily::khintchine(number(j["m"], where + ".m"));
  }
  if (v == "lognormal") {
    want({"alpha"});
    return MixtureFamily::lognormal(number(j["alpha"], where + ".alpha"));
  }
  if (v == "smoothed_uniform") {
    want({"m", "eta"});
    return MixtureFamily::smoothed_uniform(number(j["m"], where + ".m"),
                                           number(j["eta"], where + ".eta"));
  }
  fail(where + ".variant", "unknown family \"" + v + "\"");
}

ProblemSpec parse_problem_json(const json& j) {
  check_fields(j, "spec",
               {"support", "target", "constraints", "sense", "family", "epsilon",
                "search_cap"});
  ProblemSpec spec;
  spec.support = parse_support(required(j, "support", "spec"), "spec.support");
  spec.target = parse_function(required(j, "target", "spec"), spec.support, "spec.target");

  const json& cs = required(j, "constraints", "spec");
  if (!cs.is_array() || cs.empty()) fail("spec.constraints", "expected a non-empty array");
  for (size_t i = 0; i < cs.size(); ++i) {
    std::string cw = "spec.constraints[" + std::to_string(i) + "]";
    check_fields(cs[i], cw, {"g", "lo", "hi"});
    MomentConstraint c;
    c.g = parse_function(required(cs[i], "g", cw), spec.support, cw + ".g");
    c.sigma_lo = number(required(cs[i], "lo", cw), cw + ".lo");
    c.sigma_hi = number(required(cs[i], "hi", cw), cw + ".hi");
    spec.constraints.push_back(std::move(c));
  }

  const json& sj = required(j, "sense", "spec");
  if (!sj.is_string()) fail("spec.sense", "expected \"upper\" or \"lower\"");
  std::string sense = sj.get<std::string>();
  if (sense == "upper") spec.sense = Sense::Upper;
  else if (sense == "lower") spec.sense = Sense::Lower;
  else fail("spec.sense", "expected \"upper\" or \"lower\", got \"" + sense + "\"");

  spec.family = parse_family(required(j, "family", "spec"), "spec.family");
  if (j.contains("epsilon")) spec.cg_epsilon = number(j["epsilon"], "spec.epsilon");
  if (j.contains("search_cap")) spec.search_cap = number(j["search_cap"], "spec.search_cap");

  spec.finalize_defaults();
  try {
    spec.validate();
  } catch (const Error& e) {
    fail("spec", e.what());
  }
  return spec;
}

json function_json(const PiecewiseFunction& f, const std::string& where) {
  json pieces = json::array();
  std::vector<double> edges;
  edges.push_back(f.support().lower);
  for (double b : f.breakpoints()) edges.push_back(b);
  edges.push_back(f.support().upper);
  for (size_t i = 0; i < f.pieces().size(); ++i) {
    const auto& pc = f.pieces()[i];
    if (pc.has_den) fail(where, "cannot serialize a rational piece");
    json iv = json::array();
    iv.push_back(std::isinf(edges[i]) ? json("-inf") : json(edges[i]));
    iv.push_back(std::isinf(edges[i + 1]) ? json("inf") : json(edges[i + 1]));
    json p;
    p["interval"] = iv;
    p["coeffs"] = pc.num.coeffs().empty() ? std::vector<double>{0.0} : pc.num.coeffs();
    pieces.push_back(p);
  }
  json out;
  out["pieces"] = pieces;
  return out;
}

}  // namespace

ProblemSpec parse_problem_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return parse_problem_json(j);
}

ProblemSpec parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_text(ss.str());
}

std::string serialize_problem(const ProblemSpec& spec) {
  json j;
  j["support"]["lo"] = std::isinf(spec.support.lower) ? json("-inf") : json(spec.support.lower);
  j["support"]["hi"] = std::isinf(spec.support.upper) ? json("inf") : json(spec.support.upper);
  j["target"] = function_json(spec.target, "target");
  json cs = json::array();
  for (size_t i = 0; i < spec.constraints.size(); ++i) {
    const auto& c = spec.constraints[i];
    json cj;
    cj["g"] = function_json(c.g, "constraints[" + std::to_string(i) + "].g");
    cj["lo"] = c.sigma_lo;
    cj["hi"] = c.sigma_hi;
    cs.push_back(cj);
  }
  j["constraints"] = cs;
  j["sense"] = spec.sense == Sense::Upper ? "upper" : "lower";
  json fj;
  using K = MixtureFamily::Kind;
  switch (spec.family.kind) {
    case K::Dirac: fj["variant"] = "dirac"; break;
    case K::UniformZero: fj["variant"] = "uniform_zero"; break;
    case K::KhintchineUniform:
      fj["variant"] = "khintchine";
      fj["m"] = spec.family.mode;
      break;
    case K::Lognormal:
      fj["variant"] = "lognormal";
      fj["alpha"] = spec.family.alpha;
      break;
    case K::SmoothedUniform:
      fj["variant"] = "smoothed_uniform";
      fj["m"] = spec.family.mode;
      fj["eta"] = spec.family.eta;
      break;
  }
  j["family"] = fj;
  if (spec.cg_epsilon > 0) j["epsilon"] = spec.cg_epsilon;
  if (spec.search_cap > 0) j["search_cap"] = spec.search_cap;
  return j.dump(2);
}

}  // namespace spb::io
