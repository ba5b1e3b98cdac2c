#include "memchain/serialize.hpp"

#include <cmath>
#include <sstream>

namespace memchain {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, field + ": " + what);
}

const json& unwrap(const json& doc, const char* key) {
  if (!doc.is_object()) parse_fail(key, "expected a JSON object");
  if (auto it = doc.find(key); it != doc.end()) {
    if (!it->is_object()) parse_fail(key, "expected an object");
    return *it;
  }
  return doc;
}

const json& member(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "." + key, "missing");
  return *it;
}

double number_at(const json& v, const std::string& field) {
  if (!v.is_number()) parse_fail(field, "expected a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array()) parse_fail(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_at(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename Build>
auto checked(const char* what, Build&& build) {
  try {
    return build();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::InvariantViolation, std::string(what) + ": " + e.what());
  }
}

}  // namespace

json to_json(const LoopGenerator& gen) {
  return json{{"loop",
               {{"a", std::vector<double>(gen.split_rates().begin(), gen.split_rates().end())},
                {"b", std::vector<double>(gen.return_rates().begin(), gen.return_rates().end())}}}};
}

json to_json(const ExpPolyKernel& K) {
  json terms = json::array();
  for (const auto& t : K.terms()) terms.push_back(json::array({t.coeff, t.rate, t.power}));
  return json{{"kernel", {{"terms", terms}}}};
}

json to_json(const GeneratorMatrix& A) {
  json rows = json::array();
  for (std::size_t i = 0; i < A.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < A.size(); ++j) row.push_back(A(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"generator", {{"n", A.size()}, {"entries", rows}}}};
}

LoopGenerator loop_from_json(const json& doc) {
  const json& body = unwrap(doc, "loop");
  auto a = number_array(member(body, "loop", "a"), "loop.a");
  auto b = number_array(member(body, "loop", "b"), "loop.b");
  if (a.size() != b.size()) {
    parse_fail("loop", "length mismatch between a (" + std::to_string(a.size()) + ") and b (" +
                           std::to_string(b.size()) + ")");
  }
  return checked("loop", [&] { return LoopGenerator(std::move(a), std::move(b)); });
}

ExpPolyKernel kernel_from_json(const json& doc) {
  const json& body = unwrap(doc, "kernel");
  const json& terms = member(body, "kernel", "terms");
  if (!terms.is_array()) parse_fail("kernel.terms", "expected an array of [c, alpha, k] triples");
  std::vector<KernelTerm> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string field = "kernel.terms[" + std::to_string(i) + "]";
    const json& t = terms[i];
    if (!t.is_array() || (t.size() != 3 && t.size() != 2)) parse_fail(field, "expected [c, alpha, k]");
    KernelTerm term;
    term.coeff = number_at(t[0], field + "[0]");
    term.rate = number_at(t[1], field + "[1]");
    if (t.size() == 3) {
      const double k = number_at(t[2], field + "[2]");
      if (k != std::floor(k) || k < 0.0 || k > 1e6) parse_fail(field + "[2]", "power must be a nonnegative integer");
      term.power = static_cast<int>(k);
    }
    out.push_back(term);
  }
  return checked("kernel", [&] { return ExpPolyKernel(std::move(out)); });
}

GeneratorMatrix generator_from_json(const json& doc) {
  const json& body = unwrap(doc, "generator");
  const json& entries = member(body, "generator", "entries");
  if (!entries.is_array()) parse_fail("generator.entries", "expected an array of rows");
  const std::size_t n = entries.size();
  if (auto it = body.find("n"); it != body.end()) {
    if (!it->is_number_integer() && !it->is_number_unsigned()) parse_fail("generator.n", "expected an integer");
    if (it->get<long long>() != static_cast<long long>(n)) parse_fail("generator.n", "does not match the row count");
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string field = "generator.entries[" + std::to_string(i) + "]";
    auto row = number_array(entries[i], field);
    if (row.size() != n) parse_fail(field, "row length " + std::to_string(row.size()) + " != " + std::to_string(n));
    for (std::size_t j = 0; j < n; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return checked("generator", [&] { return GeneratorMatrix(std::move(A)); });
}

std::string serialize(const LoopGenerator& gen) { return to_json(gen).dump(); }
std::string serialize(const ExpPolyKernel& K) { return to_json(K).dump(); }
std::string serialize(const GeneratorMatrix& A) { return to_json(A).dump(); }

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << e.what();
    throw Error(ErrorCode::ParseError, os.str());
  }
}

LoopGenerator deserialize_loop(std::string_view text) { return loop_from_json(parse_json(text)); }
ExpPolyKernel deserialize_kernel(std::string_view text) { return kernel_from_json(parse_json(text)); }
GeneratorMatrix deserialize_generator(std::string_view text) { return generator_from_json(parse_json(text)); }

}  // namespace memchain
