#include "gamevo/config.hpp"

#include "gamevo/error.hpp"
#include "gamevo/text.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace gamevo {
namespace {

class ValueParser {
public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  nlohmann::json parse() {
    nlohmann::json v = value();
    skip();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;

  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(line_, pos_ + 1, msg); }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  nlohmann::json value() {
    skip();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return string();
    if (c == '[') return array();
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' && s_[end] != '\t') ++end;
    const std::string token(s_.substr(pos_, end - pos_));
    if (token.empty()) fail("missing value");
    pos_ = end;
    if (token == "true") return true;
    if (token == "false") return false;
    if (token.find_first_of(".eEn") == std::string::npos) {
      if (auto i = parse_int(token)) return *i;
    }
    if (auto d = parse_double(token)) return *d;
    fail("invalid value '" + token + "'");
  }

  nlohmann::json string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json array() {
    ++pos_;
    nlohmann::json out = nlohmann::json::array();
    skip();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(value());
      skip();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ']') {
        ++pos_;
        return out;
      }
      if (s_[pos_] != ',') fail("expected ',' or ']'");
      ++pos_;
      skip();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return out;
      }
    }
  }
};

std::string strip_comment(const std::string &line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

BasisFamily family_of(const std::string &s) {
  if (s == "cr" || s == "cubic") return BasisFamily::CubicSpline;
  if (s == "cc" || s == "cyclic") return BasisFamily::CyclicSpline;
  if (s == "lin" || s == "linear") return BasisFamily::Linear;
  throw DataError("unknown basis family '" + s + "' in config");
}

template <class T> T get(const nlohmann::json &v, const std::string &key) {
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw DataError("config key '" + key + "' must be a non-negative integer");
  }
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception &) {
    throw DataError("config key '" + key + "' has the wrong type");
  }
}

} // namespace

nlohmann::json parse_config_text(std::string_view text) {
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string stripped = strip_comment(raw);
    const std::string body(trim(stripped));
    if (body.empty()) continue;
    if (body.front() == '[' && body.back() == ']' && body.find('=') == std::string::npos) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line, 1, "expected key = value");
    const std::string key(trim(std::string_view(body).substr(0, eq)));
    if (key.empty()) throw ParseError(line, 1, "empty key");
    if (out.contains(key)) throw ParseError(line, 1, "duplicate key '" + key + "'");
    out[key] = ValueParser(trim(std::string_view(body).substr(eq + 1)), line).parse();
  }
  return out;
}

std::vector<int> parse_hours(std::string_view text) {
  std::set<int> hours;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    item = std::string(trim(item));
    if (item.empty()) continue;
    std::optional<long long> a, b;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      a = b = parse_int(item);
    } else {
      a = parse_int(trim(std::string_view(item).substr(0, dash)));
      b = parse_int(trim(std::string_view(item).substr(dash + 1)));
    }
    if (!a || !b) throw DataError("invalid hour list '" + std::string(text) + "'");
    const auto lo = *a, hi = *b;
    if (lo < 0 || hi > 23) throw DataError("hours must lie in 0..23");
    if (lo > hi) throw DataError("empty hour range '" + item + "'");
    for (auto h = lo; h <= hi; ++h) hours.insert(static_cast<int>(h));
  }
  if (hours.empty()) throw DataError("empty hour list");
  return {hours.begin(), hours.end()};
}

void apply_config(const nlohmann::json &values, RunConfig &c) {
  SearchConfig &s = c.search;
  for (const auto &[key, v] : values.items()) {
    if (key == "population") s.population = get<std::size_t>(v, key);
    else if (key == "budget") s.budget = get<std::size_t>(v, key);
    else if (key == "tournament") s.tournament = get<std::size_t>(v, key);
    else if (key == "p_bivar") s.p_bivar = get<double>(v, key);
    else if (key == "max_effects") s.k_max_effects = get<std::size_t>(v, key);
    else if (key == "k_min") s.k_min = get<int>(v, key);
    else if (key == "k_max") s.k_max = get<int>(v, key);
    else if (key == "te_k_max") s.te_k_max = get<int>(v, key);
    else if (key == "alpha_min") s.alpha_min = get<double>(v, key);
    else if (key == "alpha_max") s.alpha_max = get<double>(v, key);
    else if (key == "q_min") s.q_min = get<double>(v, key);
    else if (key == "q_max") s.q_max = get<double>(v, key);
    else if (key == "sigma_min") s.sigma_min = get<double>(v, key);
    else if (key == "sigma_max") s.sigma_max = get<double>(v, key);
    else if (key == "variables") s.variables = get<std::vector<std::string>>(v, key);
    else if (key == "splines" || key == "tensors") {
      std::vector<BasisFamily> fams;
      for (const auto &name : get<std::vector<std::string>>(v, key)) fams.push_back(family_of(name));
      (key == "splines" ? s.splines : s.tensors) = fams;
    } else if (key == "smoothable") s.smoothable = get<std::vector<std::string>>(v, key);
    else if (key == "day_covariates") s.day_covariates = get<std::vector<std::string>>(v, key);
    else if (key == "day_lists") s.day_lists = get<std::vector<std::vector<int>>>(v, key);
    else if (key == "lag_covariates") s.lag_covariates = get<std::vector<std::string>>(v, key);
    else if (key == "offset_lists") s.offset_lists = get<std::vector<std::vector<int>>>(v, key);
    else if (key == "p_engineer") s.p_engineer = get<double>(v, key);
    else if (key == "p_select") s.p_select = get<double>(v, key);
    else if (key == "eta") s.eta = get<double>(v, key);
    else if (key == "qigs_in_loop") s.qigs_in_loop = get<int>(v, key);
    else if (key == "qigs_iterations") s.qigs_iterations = get<int>(v, key);
    else if (key == "q0") s.q0 = get<double>(v, key);
    else if (key == "qigs_multipliers") s.qigs.multipliers = get<std::vector<double>>(v, key);
    else if (key == "seed") {
      s.seed = get<std::uint64_t>(v, key);
      c.seed_set = true;
    }
    else if (key == "jobs") s.jobs = get<unsigned>(v, key);
    else if (key == "log_wall_time") s.log_wall_time = get<bool>(v, key);
    else if (key == "quantile_knots") s.fit.basis.quantile_knots = get<bool>(v, key);
    else if (key == "algo") c.algo = get<std::string>(v, key);
    else if (key == "data") c.data = get<std::string>(v, key);
    else if (key == "schema") c.schema = get<std::string>(v, key);
    else if (key == "output") c.output = get<std::string>(v, key);
    else if (key == "train_end") c.train_end = get<std::string>(v, key);
    else if (key == "valid_end") c.valid_end = get<std::string>(v, key);
    else if (key == "exclude") {
      c.exclude.clear();
      for (const auto &w : get<std::vector<std::vector<std::string>>>(v, key)) {
        if (w.size() != 2) throw DataError("exclusion windows need a start and an end");
        c.exclude.emplace_back(w[0], w[1]);
      }
    } else if (key == "hours") {
      c.hours = v.is_string() ? parse_hours(v.get<std::string>()) : get<std::vector<int>>(v, key);
    } else if (key == "seed_preset") c.seed_preset = get<std::string>(v, key);
    else if (key == "sota_alpha") c.sota_alpha = get<double>(v, key);
    else if (key == "consume_history") c.consume_history = get<bool>(v, key);
    else throw DataError("unknown config key '" + key + "'");
  }
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  apply_config(parse_config_text(ss.str()), c);
  return c;
}

} // namespace gamevo
