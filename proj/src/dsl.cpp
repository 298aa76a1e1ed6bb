#include "gamevo/dsl.hpp"

#include "gamevo/error.hpp"
#include "gamevo/text.hpp"

#include <cctype>
#include <optional>

namespace gamevo {

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string family_code(BasisFamily f) {
  switch (f) {
  case BasisFamily::Linear: return "lin";
  case BasisFamily::CubicSpline: return "cr";
  case BasisFamily::CyclicSpline: return "cc";
  case BasisFamily::Categorical: return "cat";
  case BasisFamily::TensorProduct: return "te";
  }
  return "?";
}

std::string int_list(const std::vector<int> &v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out + "]";
}

std::string bit_string(const std::vector<bool> &v) {
  std::string out;
  for (bool b : v) out += b ? '1' : '0';
  return out;
}

std::string tensor_feature(const std::string &name, const FeatureEngineering &eng) {
  if (const auto *e = std::get_if<ExpSmooth>(&eng)) {
    return "smooth(" + name + ", alpha=" + format_double(e->alpha) + ")";
  }
  if (const auto *e = std::get_if<LagSet>(&eng)) {
    return "lag(" + name + ", offsets=" + int_list(e->offsets) + ")";
  }
  if (const auto *e = std::get_if<CategorySelect>(&eng)) {
    return "select(" + name + ", " + bit_string(e->selected) + ")";
  }
  if (const auto *e = std::get_if<DaySet>(&eng)) {
    return "days(" + name + ", " + int_list(e->days) + ")";
  }
  return name;
}

} // namespace

std::string serialize(const Effect &effect) {
  const BasisSpec &b = effect.basis;
  if (effect.bivariate()) {
    std::string out = "te(" + tensor_feature(effect.covariates[0], effect.engineering[0]) + ", " +
                      tensor_feature(effect.covariates[1], effect.engineering[1]);
    out += ", bs=(" + family_code(b.marginals[0].family) + "," + family_code(b.marginals[1].family) + ")";
    out += ", k=(" + std::to_string(b.marginals[0].size) + "," + std::to_string(b.marginals[1].size) + "))";
    return out;
  }
  const std::string &name = effect.covariates.at(0);
  const FeatureEngineering &eng = effect.engineering.at(0);
  if (b.family == BasisFamily::Categorical) {
    std::string out = "cat(" + name + ", m=" + std::to_string(b.size);
    if (const auto *e = std::get_if<CategorySelect>(&eng)) {
      out += ", select=" + bit_string(e->selected);
    } else if (const auto *e = std::get_if<DaySet>(&eng)) {
      out += ", days=" + int_list(e->days);
    }
    return out + ")";
  }
  std::string tail;
  if (b.family == BasisFamily::Linear) {
    tail = ", bs=lin";
  } else {
    tail = ", bs=" + family_code(b.family) + ", k=" + std::to_string(b.size);
  }
  if (const auto *e = std::get_if<ExpSmooth>(&eng)) {
    return "smooth(" + name + ", alpha=" + format_double(e->alpha) + tail + ")";
  }
  if (const auto *e = std::get_if<LagSet>(&eng)) {
    return "lag(" + name + ", offsets=" + int_list(e->offsets) + tail + ")";
  }
  if (b.family == BasisFamily::Linear) {
    return "lin(" + name + ")";
  }
  return "s(" + name + tail + ")";
}

std::string serialize(const Formula &formula) {
  std::string out;
  for (std::size_t k = 0; k < formula.effects.size(); ++k) {
    if (k) out += " + ";
    out += serialize(formula.effects[k]);
  }
  return out;
}

std::string serialize(const AdaptiveModel &model) {
  std::string out = serialize(model.formula);
  if (model.q_diag) {
    out += " | Q=[";
    for (std::size_t k = 0; k < model.q_diag->size(); ++k) {
      if (k) out += ',';
      out += format_double((*model.q_diag)[k]);
    }
    out += "]";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

enum class Tok { Ident, Number, LParen, RParen, LBracket, RBracket, Comma, Equals, Plus, Bar, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::string describe(Tok k) {
  switch (k) {
  case Tok::Ident: return "identifier";
  case Tok::Number: return "number";
  case Tok::LParen: return "'('";
  case Tok::RParen: return "')'";
  case Tok::LBracket: return "'['";
  case Tok::RBracket: return "']'";
  case Tok::Comma: return "','";
  case Tok::Equals: return "'='";
  case Tok::Plus: return "'+'";
  case Tok::Bar: return "'|'";
  case Tok::End: return "end of input";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t l = line, cc = col;
    auto single = [&](Tok k) {
      out.push_back({k, std::string(1, c), l, cc});
      advance(1);
    };
    switch (c) {
    case '(': single(Tok::LParen); continue;
    case ')': single(Tok::RParen); continue;
    case '[': single(Tok::LBracket); continue;
    case ']': single(Tok::RBracket); continue;
    case ',': single(Tok::Comma); continue;
    case '=': single(Tok::Equals); continue;
    case '+': single(Tok::Plus); continue;
    case '|': single(Tok::Bar); continue;
    default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' || text[j] == '.')) {
        ++j;
      }
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), l, cc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      std::size_t j = i + 1;
      while (j < text.size()) {
        const char d = text[j];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
          ++j;
        } else if ((d == 'e' || d == 'E') && j + 1 < text.size()) {
          ++j;
          if (text[j] == '+' || text[j] == '-') ++j;
        } else {
          break;
        }
      }
      out.push_back({Tok::Number, std::string(text.substr(i, j - i)), l, cc});
      advance(j - i);
      continue;
    }
    throw ParseError(l, cc, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
public:
  Parser(std::string_view text, const CovariateRegistry *registry) : tokens_(tokenize(text)), registry_(registry) {}

  AdaptiveModel model() {
    AdaptiveModel m;
    m.formula = formula();
    if (peek().kind == Tok::Bar) {
      next();
      const Token &q = expect_ident();
      if (q.text != "Q") fail(q, "expected 'Q'");
      expect(Tok::Equals);
      m.q_diag = number_list();
    }
    expect(Tok::End);
    return m;
  }

  Formula formula_only() {
    Formula f = formula();
    expect(Tok::End);
    return f;
  }

private:
  struct Options {
    std::optional<BasisFamily> bs;
    std::optional<int> k;
    std::optional<double> alpha;
    std::optional<std::vector<int>> offsets;
    std::optional<int> m;
    std::optional<std::vector<bool>> select;
    std::optional<std::vector<int>> days;
  };

  const Token &peek() const { return tokens_[pos_]; }
  const Token &next() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const Token &t, const std::string &msg) const { throw ParseError(t.line, t.column, msg); }

  const Token &expect(Tok kind) {
    const Token &t = peek();
    if (t.kind != kind) {
      fail(t, "expected " + describe(kind) + ", found " + (t.kind == Tok::End ? describe(Tok::End) : "'" + t.text + "'"));
    }
    return next();
  }

  const Token &expect_ident() { return expect(Tok::Ident); }

  // Accept either ',' (continue) or ')' (stop).
  bool comma_or_close() {
    const Token &t = peek();
    if (t.kind == Tok::Comma) {
      next();
      return true;
    }
    if (t.kind == Tok::RParen) {
      next();
      return false;
    }
    fail(t, "expected ',' or ')', found " + (t.kind == Tok::End ? describe(Tok::End) : "'" + t.text + "'"));
  }

  Formula formula() {
    Formula f;
    f.effects.push_back(term());
    while (peek().kind == Tok::Plus) {
      next();
      f.effects.push_back(term());
    }
    return f;
  }

  int integer() {
    const Token &t = expect(Tok::Number);
    auto v = parse_int(t.text);
    if (!v) fail(t, "expected integer, found '" + t.text + "'");
    return static_cast<int>(*v);
  }

  double number() {
    const Token &t = expect(Tok::Number);
    auto v = parse_double(t.text);
    if (!v) fail(t, "expected number, found '" + t.text + "'");
    return *v;
  }

  std::vector<int> int_list() {
    expect(Tok::LBracket);
    std::vector<int> out;
    if (peek().kind != Tok::RBracket) {
      out.push_back(integer());
      while (peek().kind == Tok::Comma) {
        next();
        out.push_back(integer());
      }
    }
    expect(Tok::RBracket);
    return out;
  }

  std::vector<double> number_list() {
    expect(Tok::LBracket);
    std::vector<double> out;
    if (peek().kind != Tok::RBracket) {
      out.push_back(number());
      while (peek().kind == Tok::Comma) {
        next();
        out.push_back(number());
      }
    }
    expect(Tok::RBracket);
    return out;
  }

  std::vector<bool> bits() {
    const Token &t = expect(Tok::Number);
    std::vector<bool> out;
    for (char c : t.text) {
      if (c != '0' && c != '1') fail(t, "expected bit string, found '" + t.text + "'");
      out.push_back(c == '1');
    }
    return out;
  }

  BasisFamily family(const Token &t) {
    if (t.text == "cr") return BasisFamily::CubicSpline;
    if (t.text == "cc") return BasisFamily::CyclicSpline;
    if (t.text == "lin") return BasisFamily::Linear;
    if (t.text == "cat") return BasisFamily::Categorical;
    fail(t, "expected basis code cr|cc|lin|cat, found '" + t.text + "'");
  }

  // Parses `key=value` options until ')' is consumed.
  void options(Options &o, bool more) {
    while (more) {
      const Token &key = expect_ident();
      expect(Tok::Equals);
      if (key.text == "bs") {
        o.bs = family(expect_ident());
      } else if (key.text == "k") {
        o.k = integer();
      } else if (key.text == "alpha") {
        o.alpha = number();
      } else if (key.text == "offsets") {
        o.offsets = int_list();
      } else if (key.text == "m") {
        o.m = integer();
      } else if (key.text == "select") {
        o.select = bits();
      } else if (key.text == "days") {
        o.days = int_list();
      } else {
        fail(key, "unknown option '" + key.text + "'");
      }
      more = comma_or_close();
    }
  }

  int modalities_of(const Token &name_tok) {
    if (registry_) {
      if (const Covariate *c = registry_->find(name_tok.text); c && c->kind == CovariateKind::Categorical) {
        return c->modalities;
      }
    }
    fail(name_tok, "modality count of '" + name_tok.text + "' unknown: give m=INT");
  }

  bool registry_categorical(const std::string &name) const {
    if (!registry_) return false;
    const Covariate *c = registry_->find(name);
    return c && c->kind == CovariateKind::Categorical;
  }

  Effect univariate(const Token &head) {
    expect(Tok::LParen);
    const Token name = expect_ident();
    Options o;
    options(o, comma_or_close());
    FeatureEngineering eng = Identity{};
    if (o.alpha) eng = ExpSmooth{*o.alpha};
    if (o.offsets) {
      if (o.alpha) fail(name, "alpha and offsets are mutually exclusive");
      eng = LagSet{*o.offsets};
    }
    const std::string &h = head.text;
    if (h == "smooth" && !o.alpha) fail(head, "smooth() requires alpha=FLOAT");
    if (h == "lag" && !o.offsets) fail(head, "lag() requires offsets=[INT,...]");
    if (h == "cat") {
      if (o.bs || o.k || o.alpha || o.offsets) fail(head, "cat() accepts only m=, select= and days=");
      int m = o.m ? *o.m : 0;
      if (!o.m) {
        m = o.select ? static_cast<int>(o.select->size()) : modalities_of(name);
      }
      if (o.select && o.days) fail(head, "select and days are mutually exclusive");
      if (o.select) eng = CategorySelect{*o.select};
      if (o.days) eng = DaySet{*o.days};
      return Effect::univariate(name.text, BasisSpec::categorical(m), std::move(eng));
    }
    if (o.m || o.select || o.days) fail(head, h + "() does not accept m=, select= or days=");
    BasisSpec basis;
    if (h == "lin") {
      if (o.bs || o.k) fail(head, "lin() takes no basis options");
      basis = BasisSpec::linear();
    } else {
      const BasisFamily fam = o.bs ? *o.bs : BasisFamily::CubicSpline;
      if (fam == BasisFamily::Linear) {
        if (o.k) fail(head, "bs=lin takes no k");
        basis = BasisSpec::linear();
      } else if (fam == BasisFamily::Categorical) {
        fail(head, "use cat() for categorical effects");
      } else {
        basis = {fam, o.k ? *o.k : 10, {}};
      }
    }
    return Effect::univariate(name.text, basis, std::move(eng));
  }

  struct Feature {
    std::string name;
    FeatureEngineering eng;
  };

  Feature tensor_feature() {
    const Token head = expect_ident();
    if (peek().kind != Tok::LParen) {
      return {head.text, Identity{}};
    }
    next();
    const Token name = expect_ident();
    expect(Tok::Comma);
    Feature f{name.text, Identity{}};
    if (head.text == "smooth") {
      const Token &key = expect_ident();
      if (key.text != "alpha") fail(key, "expected 'alpha'");
      expect(Tok::Equals);
      f.eng = ExpSmooth{number()};
    } else if (head.text == "lag") {
      const Token &key = expect_ident();
      if (key.text != "offsets") fail(key, "expected 'offsets'");
      expect(Tok::Equals);
      f.eng = LagSet{int_list()};
    } else if (head.text == "select") {
      f.eng = CategorySelect{bits()};
    } else if (head.text == "days") {
      f.eng = DaySet{int_list()};
    } else {
      fail(head, "unknown feature function '" + head.text + "'");
    }
    expect(Tok::RParen);
    return f;
  }

  Effect tensor(const Token &head) {
    expect(Tok::LParen);
    const Token &first_tok = peek();
    Feature a = tensor_feature();
    expect(Tok::Comma);
    Feature b = tensor_feature();
    std::optional<std::pair<BasisFamily, BasisFamily>> bs;
    std::optional<std::pair<int, int>> k;
    bool more = comma_or_close();
    while (more) {
      const Token &key = expect_ident();
      expect(Tok::Equals);
      if (key.text == "bs") {
        expect(Tok::LParen);
        const BasisFamily fa = family(expect_ident());
        expect(Tok::Comma);
        const BasisFamily fb = family(expect_ident());
        expect(Tok::RParen);
        bs = {fa, fb};
      } else if (key.text == "k") {
        expect(Tok::LParen);
        const int ka = integer();
        expect(Tok::Comma);
        const int kb = integer();
        expect(Tok::RParen);
        k = {ka, kb};
      } else {
        fail(key, "unknown te() option '" + key.text + "'");
      }
      more = comma_or_close();
    }
    auto default_family = [&](const Feature &f) {
      if (engineering_is_categorical(f.eng) || registry_categorical(f.name)) return BasisFamily::Categorical;
      return BasisFamily::CubicSpline;
    };
    const BasisFamily fa = bs ? bs->first : default_family(a);
    const BasisFamily fb = bs ? bs->second : default_family(b);
    auto default_size = [&](BasisFamily fam, const Feature &f) {
      if (fam != BasisFamily::Categorical) return 5;
      if (const auto *sel = std::get_if<CategorySelect>(&f.eng)) return static_cast<int>(sel->selected.size());
      return modalities_of(Token{Tok::Ident, f.name, first_tok.line, first_tok.column});
    };
    const int ka = k ? k->first : default_size(fa, a);
    const int kb = k ? k->second : default_size(fb, b);
    (void)head;
    return Effect::tensor(a.name, b.name, {fa, ka}, {fb, kb}, std::move(a.eng), std::move(b.eng));
  }

  Effect term() {
    const Token head = expect_ident();
    if (head.text == "te") {
      return tensor(head);
    }
    if (head.text == "s" || head.text == "lin" || head.text == "smooth" || head.text == "lag" || head.text == "cat") {
      return univariate(head);
    }
    fail(head, "expected term lin|s|smooth|lag|cat|te, found '" + head.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const CovariateRegistry *registry_;
};

} // namespace

AdaptiveModel deserialize(std::string_view text, const CovariateRegistry *registry) {
  return Parser(text, registry).model();
}

Formula parse_formula(std::string_view text, const CovariateRegistry *registry) {
  return Parser(text, registry).formula_only();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using nlohmann::json;

namespace {

BasisFamily family_from_name(const std::string &s) {
  for (BasisFamily f : {BasisFamily::Linear, BasisFamily::CubicSpline, BasisFamily::CyclicSpline,
                        BasisFamily::Categorical, BasisFamily::TensorProduct}) {
    if (family_name(f) == s) return f;
  }
  throw DataError("unknown basis family '" + s + "'");
}

} // namespace

json to_json(const FeatureEngineering &eng) {
  struct Visitor {
    json operator()(const Identity &) const { return {{"type", "identity"}}; }
    json operator()(const ExpSmooth &e) const { return {{"type", "exp-smooth"}, {"alpha", e.alpha}}; }
    json operator()(const CategorySelect &e) const {
      return {{"type", "category-select"}, {"v", bit_string(e.selected)}};
    }
    json operator()(const LagSet &e) const { return {{"type", "lag-set"}, {"offsets", e.offsets}}; }
    json operator()(const DaySet &e) const { return {{"type", "day-set"}, {"days", e.days}}; }
  };
  return std::visit(Visitor{}, eng);
}

json to_json(const BasisSpec &basis) {
  json j{{"family", family_name(basis.family)}, {"size", basis.size}};
  if (!basis.marginals.empty()) {
    json ms = json::array();
    for (const auto &m : basis.marginals) {
      ms.push_back({{"family", family_name(m.family)}, {"size", m.size}});
    }
    j["marginals"] = ms;
  }
  return j;
}

json to_json(const Effect &effect) {
  json eng = json::array();
  for (const auto &e : effect.engineering) eng.push_back(to_json(e));
  return {{"covariates", effect.covariates}, {"engineering", eng}, {"basis", to_json(effect.basis)}};
}

json to_json(const Formula &formula) {
  json effects = json::array();
  for (const auto &e : formula.effects) effects.push_back(to_json(e));
  return {{"effects", effects}};
}

json to_json(const AdaptiveModel &model) {
  json j{{"formula", to_json(model.formula)}};
  j["q_diag"] = model.q_diag ? json(*model.q_diag) : json(nullptr);
  return j;
}

FeatureEngineering engineering_from_json(const json &j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "identity") return Identity{};
  if (type == "exp-smooth") return ExpSmooth{j.at("alpha").get<double>()};
  if (type == "category-select") {
    std::vector<bool> v;
    for (char c : j.at("v").get<std::string>()) {
      if (c != '0' && c != '1') throw DataError("category-select bit string must contain only 0/1");
      v.push_back(c == '1');
    }
    return CategorySelect{v};
  }
  if (type == "lag-set") return LagSet{j.at("offsets").get<std::vector<int>>()};
  if (type == "day-set") return DaySet{j.at("days").get<std::vector<int>>()};
  throw DataError("unknown feature engineering type '" + type + "'");
}

BasisSpec basis_from_json(const json &j) {
  BasisSpec b;
  b.family = family_from_name(j.at("family").get<std::string>());
  b.size = j.at("size").get<int>();
  if (j.contains("marginals")) {
    for (const auto &m : j.at("marginals")) {
      b.marginals.push_back({family_from_name(m.at("family").get<std::string>()), m.at("size").get<int>()});
    }
  }
  return b;
}

Effect effect_from_json(const json &j) {
  Effect e;
  e.covariates = j.at("covariates").get<std::vector<std::string>>();
  for (const auto &x : j.at("engineering")) e.engineering.push_back(engineering_from_json(x));
  e.basis = basis_from_json(j.at("basis"));
  return e;
}

Formula formula_from_json(const json &j) {
  Formula f;
  for (const auto &x : j.at("effects")) f.effects.push_back(effect_from_json(x));
  return f;
}

AdaptiveModel model_from_json(const json &j) {
  AdaptiveModel m;
  m.formula = formula_from_json(j.at("formula"));
  if (j.contains("q_diag") && !j.at("q_diag").is_null()) {
    m.q_diag = j.at("q_diag").get<std::vector<double>>();
  }
  return m;
}

json to_json(const Covariate &c) {
  json j{{"name", c.name}};
  switch (c.kind) {
  case CovariateKind::Numeric: j["kind"] = "numeric"; break;
  case CovariateKind::Cyclic:
    j["kind"] = "cyclic";
    j["period"] = c.period;
    break;
  case CovariateKind::Categorical:
    j["kind"] = "categorical";
    j["modalities"] = c.modalities;
    break;
  }
  return j;
}

Covariate covariate_from_json(const json &j) {
  const std::string name = j.at("name").get<std::string>();
  const std::string kind = j.value("kind", "numeric");
  if (kind == "numeric") return Covariate::numeric(name);
  if (kind == "cyclic") return Covariate::cyclic(name, j.at("period").get<double>());
  if (kind == "categorical") return Covariate::categorical(name, j.at("modalities").get<int>());
  throw DataError("unknown covariate kind '" + kind + "' for " + name);
}

json to_json(const CovariateRegistry &registry) {
  json arr = json::array();
  for (const auto &c : registry.all()) arr.push_back(to_json(c));
  return arr;
}

CovariateRegistry registry_from_json(const json &j) {
  CovariateRegistry r;
  for (const auto &c : j) r.add(covariate_from_json(c));
  return r;
}

} // namespace gamevo
