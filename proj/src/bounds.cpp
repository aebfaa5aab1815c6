#include "stabilab/bounds.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "stabilab/io_util.hpp"

namespace stabilab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void validate_common(const BoundInputs& in) {
  require(in.n >= 1, "bound inputs: n >= 1 required");
  require(in.gamma >= 0.0, "bound inputs: gamma >= 0 required");
  require(in.eps >= 0.0, "bound inputs: eps >= 0 required");
  require(in.c > 0.0 && in.c1 > 0.0 && in.c2 > 0.0,
          "bound inputs: constants must be positive");
}

void validate_delta(const BoundInputs& in) {
  require(in.delta > 0.0 && in.delta < 1.0, "bound inputs: delta in (0,1) required");
}

double var_bound_e2(double gamma, double n) { return 1.0 / (2.0 * n) + 6.0 * gamma; }

double var_bound_e5(double gamma, double n) {
  return 16.0 * gamma * gamma + 2.0 / n;
}

double tail_bound_e3(double gamma, double n, double delta) {
  return (4.0 * gamma + 1.0 / n) * std::sqrt(n * std::log(1.0 / delta) / 2.0) +
         2.0 * gamma;
}

double tail_bound_e6(double gamma, double n, double delta) {
  return 8.0 * std::sqrt((2.0 * gamma + 1.0 / n) * std::log(8.0 / delta));
}

}  // namespace

double evaluate_bound(BoundId id, const BoundInputs& in) {
  validate_common(in);
  const auto n = static_cast<double>(in.n);
  const double g = in.gamma;
  switch (id) {
    case BoundId::exp_e1:
      return g;
    case BoundId::var_e2:
      return var_bound_e2(g, n);
    case BoundId::hp_e3:
      validate_delta(in);
      return tail_bound_e3(g, n, in.delta);
    case BoundId::firstmoment_e4:
      return in.c * (g + 1.0 / std::sqrt(n));
    case BoundId::var_e5:
      return var_bound_e5(g, n);
    case BoundId::hp_e6:
      validate_delta(in);
      return tail_bound_e6(g, n, in.delta);
    case BoundId::hp_fv19:
      validate_delta(in);
      return in.c * (g * std::log(n) * std::log(n / in.delta) +
                     std::sqrt(std::log(1.0 / in.delta) / n));
    case BoundId::thm5_var:
      return var_bound_e5(std::expm1(in.eps), n);
    case BoundId::thm5_hp:
      validate_delta(in);
      return tail_bound_e6(std::expm1(in.eps), n, in.delta);
    case BoundId::cor3_a:
      validate_delta(in);
      return in.c1 * (g / (4.0 * std::sqrt(in.delta)) + 1.0 / std::sqrt(n));
    case BoundId::cor3_b:
      validate_delta(in);
      return 0.5 * in.c2 * std::sqrt(g * std::log(1.0 / in.delta));
    case BoundId::cor4_a:
    case BoundId::cor5_a:
      validate_delta(in);
      return in.c1 / (std::pow(in.delta, 0.25) * std::sqrt(n));
    case BoundId::cor4_b:
    case BoundId::cor5_b:
      validate_delta(in);
      return in.c2 * std::sqrt(std::log(1.0 / in.delta)) / std::cbrt(n);
    case BoundId::ssss_thm3:
      validate_delta(in);
      return g / in.delta;
    case BoundId::cor2:
      validate_delta(in);
      return (4.0 / std::sqrt(in.delta * n)) * (1.0 + 8.0 / (in.delta * n));
  }
  throw std::invalid_argument("unknown bound id");
}

namespace {

const std::map<BoundId, std::string>& id_names() {
  static const std::map<BoundId, std::string> names = {
      {BoundId::exp_e1, "exp_e1"},
      {BoundId::var_e2, "var_e2"},
      {BoundId::hp_e3, "hp_e3"},
      {BoundId::firstmoment_e4, "firstmoment_e4"},
      {BoundId::var_e5, "var_e5"},
      {BoundId::hp_e6, "hp_e6"},
      {BoundId::hp_fv19, "hp_fv19"},
      {BoundId::thm5_var, "thm5_var"},
      {BoundId::thm5_hp, "thm5_hp"},
      {BoundId::cor3_a, "cor3_a"},
      {BoundId::cor3_b, "cor3_b"},
      {BoundId::cor4_a, "cor4_a"},
      {BoundId::cor4_b, "cor4_b"},
      {BoundId::cor5_a, "cor5_a"},
      {BoundId::cor5_b, "cor5_b"},
      {BoundId::ssss_thm3, "ssss_thm3"},
      {BoundId::cor2, "cor2"},
  };
  return names;
}

const std::map<BoundId, std::string>& id_formulas() {
  static const std::map<BoundId, std::string> formulas = {
      {BoundId::exp_e1, "gamma"},
      {BoundId::var_e2, "1/(2n) + 6*gamma"},
      {BoundId::hp_e3, "(4*gamma + 1/n)*sqrt(n*ln(1/delta)/2) + 2*gamma"},
      {BoundId::firstmoment_e4, "c*(gamma + 1/sqrt(n))"},
      {BoundId::var_e5, "16*gamma^2 + 2/n"},
      {BoundId::hp_e6, "8*sqrt((2*gamma + 1/n)*ln(8/delta))"},
      {BoundId::hp_fv19, "c*(gamma*ln(n)*ln(n/delta) + sqrt(ln(1/delta)/n))"},
      {BoundId::thm5_var, "16*(e^eps - 1)^2 + 2/n"},
      {BoundId::thm5_hp, "8*sqrt((2*(e^eps - 1) + 1/n)*ln(8/delta))"},
      {BoundId::cor3_a, "c1*(gamma/(4*sqrt(delta)) + 1/sqrt(n))"},
      {BoundId::cor3_b, "(c2/2)*sqrt(gamma*ln(1/delta))"},
      {BoundId::cor4_a, "c1/(delta^(1/4)*sqrt(n))"},
      {BoundId::cor4_b, "c2*sqrt(ln(1/delta))/n^(1/3)"},
      {BoundId::cor5_a, "c1/(delta^(1/4)*sqrt(n))"},
      {BoundId::cor5_b, "c2*sqrt(ln(1/delta))/n^(1/3)"},
      {BoundId::ssss_thm3, "gamma/delta"},
      {BoundId::cor2, "(4/sqrt(delta*n))*(1 + 8/(delta*n))"},
  };
  return formulas;
}

}  // namespace

std::string bound_id_to_string(BoundId id) { return id_names().at(id); }

BoundId bound_id_from_string(const std::string& s) {
  for (const auto& [id, name] : id_names())
    if (name == s) return id;
  throw std::invalid_argument("unknown bound id: " + s);
}

std::string bound_formula(BoundId id) { return id_formulas().at(id); }

bool bound_constant_parameterized(BoundId id) {
  switch (id) {
    case BoundId::firstmoment_e4:
    case BoundId::hp_fv19:
    case BoundId::cor3_a:
    case BoundId::cor3_b:
    case BoundId::cor4_a:
    case BoundId::cor4_b:
    case BoundId::cor5_a:
    case BoundId::cor5_b:
      return true;
    default:
      return false;
  }
}

const std::vector<BoundId>& all_bound_ids() {
  static const std::vector<BoundId> ids = {
      BoundId::exp_e1,  BoundId::var_e2,         BoundId::hp_e3,
      BoundId::firstmoment_e4, BoundId::var_e5,  BoundId::hp_e6,
      BoundId::hp_fv19, BoundId::thm5_var,       BoundId::thm5_hp,
      BoundId::cor3_a,  BoundId::cor3_b,         BoundId::cor4_a,
      BoundId::cor4_b,  BoundId::cor5_a,         BoundId::cor5_b,
      BoundId::ssss_thm3, BoundId::cor2,
  };
  return ids;
}

BoundCatalogEntry evaluate_catalog_entry(BoundId id, const BoundInputs& in) {
  BoundCatalogEntry entry;
  entry.id = id;
  entry.formula = bound_formula(id);
  entry.inputs = in;
  entry.value = evaluate_bound(id, in);
  entry.vacuous = entry.value >= 1.0;
  entry.constant_parameterized = bound_constant_parameterized(id);
  return entry;
}

std::vector<BoundCatalogEntry> evaluate_catalog(const BoundInputs& in) {
  std::vector<BoundCatalogEntry> entries;
  entries.reserve(all_bound_ids().size());
  for (BoundId id : all_bound_ids()) entries.push_back(evaluate_catalog_entry(id, in));
  return entries;
}

std::pair<BoundId, double> tightest_bound(BoundKind kind, const BoundInputs& in) {
  const std::vector<BoundId> candidates =
      kind == BoundKind::second_moment
          ? std::vector<BoundId>{BoundId::var_e2, BoundId::var_e5}
          : std::vector<BoundId>{BoundId::hp_e3, BoundId::hp_e6};
  BoundId best = candidates.front();
  double best_value = evaluate_bound(best, in);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double value = evaluate_bound(candidates[i], in);
    if (value < best_value) {
      best = candidates[i];
      best_value = value;
    }
  }
  return {best, best_value};
}

std::string catalog_csv(const std::vector<BoundCatalogEntry>& entries) {
  std::string out =
      "id,formula,gamma,n,delta,eps,c,c1,c2,value,vacuous,constant_parameterized\n";
  for (const auto& e : entries) {
    out += bound_id_to_string(e.id);
    out += ",\"" + e.formula + "\"";
    out += ',' + format_double(e.inputs.gamma);
    out += ',' + std::to_string(e.inputs.n);
    out += ',' + format_double(e.inputs.delta);
    out += ',' + format_double(e.inputs.eps);
    out += ',' + format_double(e.inputs.c);
    out += ',' + format_double(e.inputs.c1);
    out += ',' + format_double(e.inputs.c2);
    out += ',' + format_double(e.value);
    out += e.vacuous ? ",1" : ",0";
    out += e.constant_parameterized ? ",1\n" : ",0\n";
  }
  return out;
}

}  // namespace stabilab
