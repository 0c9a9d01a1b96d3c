#include "klspec/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "klspec/errors.hpp"

namespace klspec {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::ConfigError, key + ": " + why);
}

double read_real(const json& v, const std::string& key) {
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

long long read_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<long long>();
}

Complex read_complex(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) fail(key, "expected a [re, im] pair");
  return {read_real(v[0], key + "[0]"), read_real(v[1], key + "[1]")};
}

std::vector<Complex> read_complex_list(const json& v, const std::string& key) {
  if (!v.is_array()) fail(key, "expected a list of [re, im] pairs");
  std::vector<Complex> out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out.push_back(read_complex(v[i], key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

CMatrix read_matrix(const json& v, Eigen::Index n, const std::string& key) {
  const std::vector<Complex> flat = read_complex_list(v, key);
  if (static_cast<Eigen::Index>(flat.size()) != n * n) {
    fail(key, "expected " + std::to_string(n * n) + " entries (row-major n x n), got " +
                  std::to_string(flat.size()));
  }
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = flat[static_cast<size_t>(i * n + j)];
  }
  return m;
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) fail(key, "missing required key");
  return doc.at(key);
}

std::string read_type(const json& obj, const std::string& key) {
  if (!obj.is_object()) fail(key, "expected an object with a \"type\" field");
  if (!obj.contains("type") || !obj.at("type").is_string()) fail(key + ".type", "expected a string");
  return obj.at("type").get<std::string>();
}

PsiSpec read_psi(const json& v) {
  PsiSpec psi;
  const std::string type = read_type(v, "psi");
  if (type == "constant") {
    psi.kind = PsiSpec::Kind::Constant;
    if (v.contains("value")) {
      psi.value = read_real(v.at("value"), "psi.value");
      if (!(psi.value > 0.0)) fail("psi.value", "must be positive");
    }
  } else if (type == "samples") {
    psi.kind = PsiSpec::Kind::Samples;
    const json& vals = v.contains("values") ? v.at("values") : json();
    if (!vals.is_array()) fail("psi.values", "expected a list of numbers");
    for (size_t i = 0; i < vals.size(); ++i) {
      psi.samples.push_back(read_real(vals[i], "psi.values[" + std::to_string(i) + "]"));
    }
  } else if (type == "rational") {
    psi.kind = PsiSpec::Kind::Rational;
    if (!v.contains("num")) fail("psi.num", "missing required key");
    if (!v.contains("den")) fail("psi.den", "missing required key");
    psi.num = read_complex_list(v.at("num"), "psi.num");
    psi.den = read_complex_list(v.at("den"), "psi.den");
    if (psi.num.empty()) fail("psi.num", "must not be empty");
    if (psi.den.empty()) fail("psi.den", "must not be empty");
  } else {
    fail("psi.type", "unknown prior type \"" + type + "\" (constant, samples, rational)");
  }
  return psi;
}

template <typename F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), key + ": " + e.what());
  }
}

}  // namespace

ProblemFile parse_problem(const json& doc) {
  if (!doc.is_object()) fail("<root>", "expected a JSON object");
  static const char* const known[] = {"n",        "A",   "B",        "Sigma",  "psi",
                                      "grid_size", "tol", "max_iter", "lambda0"};
  for (const auto& item : doc.items()) {
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
      fail(item.key(), "unknown key");
    }
  }

  ProblemFile f;
  f.source = doc;
  const long long n = read_integer(require(doc, "n"), "n");
  if (n < 1 || n > 64) fail("n", "must be between 1 and 64");
  f.n = static_cast<Eigen::Index>(n);
  f.a = read_matrix(require(doc, "A"), f.n, "A");

  const std::vector<Complex> b = read_complex_list(require(doc, "B"), "B");
  if (static_cast<Eigen::Index>(b.size()) != f.n) {
    fail("B", "expected " + std::to_string(f.n) + " entries, got " + std::to_string(b.size()));
  }
  f.b = Eigen::Map<const CVector>(b.data(), f.n);

  if (doc.contains("Sigma")) f.sigma = read_matrix(doc.at("Sigma"), f.n, "Sigma");
  f.psi = read_psi(require(doc, "psi"));

  if (doc.contains("grid_size")) {
    const long long g = read_integer(doc.at("grid_size"), "grid_size");
    if (g < 64 || (g & (g - 1)) != 0 || g > (1LL << 24)) {
      fail("grid_size", "must be a power of two between 64 and 2^24");
    }
    f.grid_size = static_cast<Eigen::Index>(g);
  }
  if (doc.contains("tol")) {
    f.tol = read_real(doc.at("tol"), "tol");
    if (!(f.tol > 0.0)) fail("tol", "must be positive");
  }
  if (doc.contains("max_iter")) {
    const long long m = read_integer(doc.at("max_iter"), "max_iter");
    if (m < 1 || m > 100000000) fail("max_iter", "must be between 1 and 1e8");
    f.max_iter = static_cast<int>(m);
  }
  if (doc.contains("lambda0")) {
    const json& l = doc.at("lambda0");
    const std::string type = read_type(l, "lambda0");
    if (type == "matrix") {
      if (!l.contains("values")) fail("lambda0.values", "missing required key");
      f.lambda0 = read_matrix(l.at("values"), f.n, "lambda0.values");
    } else if (type != "scaled-identity") {
      fail("lambda0.type", "unknown start \"" + type + "\" (scaled-identity, matrix)");
    }
  }
  return f;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_problem(doc);
}

Instance build_instance(const ProblemFile& file) {
  FilterBank fb = with_key("A/B", [&] { return validate_filterbank(file.a, file.b); });
  CircleGrid grid = with_key("grid_size", [&] { return CircleGrid(file.grid_size); });
  HermitianMatrix sigma = with_key("Sigma", [&] {
    return file.sigma ? HermitianMatrix(*file.sigma) : HermitianMatrix::identity(file.n);
  });

  std::vector<double> psi = with_key("psi", [&] {
    switch (file.psi.kind) {
      case PsiSpec::Kind::Constant:
        return sample_constant_prior(grid, file.psi.value);
      case PsiSpec::Kind::Samples:
        if (static_cast<Eigen::Index>(file.psi.samples.size()) != grid.size()) {
          std::ostringstream os;
          os << "values: expected grid_size = " << grid.size() << " samples, got "
             << file.psi.samples.size();
          throw Error(ErrorKind::LengthMismatch, os.str());
        }
        return file.psi.samples;
      case PsiSpec::Kind::Rational:
        return sample_rational_prior(grid, file.psi.num, file.psi.den);
    }
    throw Error(ErrorKind::InvalidPrior, "unknown prior kind");
  });

  RawProblem raw = with_key("Sigma", [&] { return RawProblem(fb, sigma, grid, std::move(psi)); });
  FeasibilityReport feas = check_feasibility(raw.fb, raw.sigma);
  NormalizedProblem prob = with_key("Sigma", [&] { return normalize(raw); });

  StateMatrix lambda0 = with_key("lambda0", [&] {
    if (!file.lambda0) return StateMatrix::scaled_identity(file.n);
    const HermitianMatrix h(*file.lambda0);
    const double tr = h.trace();
    if (!(tr > 0.0)) throw Error(ErrorKind::InvalidStateMatrix, "trace must be positive");
    return StateMatrix(HermitianMatrix::hermitize(h.matrix() / tr));
  });

  SolveOptions opts;
  opts.tol = file.tol;
  opts.max_iter = file.max_iter;
  return Instance{std::move(raw), std::move(feas), std::move(prob), std::move(lambda0), opts};
}

}  // namespace klspec
