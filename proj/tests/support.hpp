#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pathways/balance.hpp"
#include "pathways/calibration.hpp"
#include "pathways/game.hpp"

namespace pathways::test {

inline std::shared_ptr<const GameContext> ctx() { return GameContext::bundled(); }

inline std::string data_path(const std::string& name) { return std::string(PATHWAYS_DATA_DIR) + "/" + name; }

// Fresh scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("pathways-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Normal equations for y = a + b*x with x = year - base_year, solved in long
// double by Cramer's rule on the raw sums.
struct OlsOracle {
  long double intercept = 0;
  long double slope = 0;
};

inline OlsOracle ols_oracle(const std::vector<TimePoint>& pts, int base_year) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const long double x = p.year - base_year;
    n += 1;
    sx += x;
    sy += p.value;
    sxx += x * x;
    sxy += x * p.value;
  }
  const long double det = n * sxx - sx * sx;
  return {(sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

inline TechParams tech(TechnologyKind kind, std::optional<CarrierKind> input, double efficiency, double summer = 0.5,
                       double land = 0.0, double emission = 0.0) {
  TechParams p;
  p.kind = kind;
  p.input_carrier = input;
  p.conversion_efficiency = efficiency;
  p.summer_share = summer;
  p.land_use_factor = land;
  p.emission_factor = emission;
  return p;
}

// Random but valid balance problem.
struct BalanceInstance {
  int year = kFirstModelYear;
  BalanceInputs inputs;
  std::vector<FleetEntry> fleet;
  CarrierValues loss{};
  std::optional<double> summer_share;
};

inline BalanceInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BalanceInstance b;
  b.year = kFirstModelYear + static_cast<int>(u(rng) * (kLastModelYear - kFirstModelYear + 1)) % 29;
  for (CarrierKind c : all_values<CarrierKind>()) {
    for (Sector s : all_values<Sector>()) {
      if (u(rng) < 0.6) b.inputs.consumption[c][s] = u(rng) * 1e5;
    }
    if (u(rng) < 0.3) b.inputs.domestic_production[c] = u(rng) * 5e4;
    if (u(rng) < 0.2) b.inputs.stock_change[c] = (u(rng) - 0.5) * 1e4;
    if (u(rng) < 0.1) b.inputs.fixed_imports[c] = u(rng) * 2e4;
    if (u(rng) < 0.5) b.loss[c] = u(rng) * 0.2;
  }
  for (TechnologyKind k : all_values<TechnologyKind>()) {
    if (u(rng) < 0.25) continue;
    const auto input = [k]() -> std::optional<CarrierKind> {
      switch (k) {
        case TechnologyKind::nuclear: return CarrierKind::nuclearFuel;
        case TechnologyKind::gas: return CarrierKind::gas;
        case TechnologyKind::biomass: return CarrierKind::wood;
        case TechnologyKind::biogas: return CarrierKind::biogas;
        case TechnologyKind::waste: return CarrierKind::waste;
        default: return CarrierKind::ambientRenewable;
      }
    }();
    b.fleet.push_back({tech(k, input, 0.2 + 0.8 * u(rng), u(rng), u(rng) * 0.01, u(rng) * 1e5), u(rng) * 1.5e5});
  }
  if (u(rng) < 0.5) b.summer_share = u(rng);
  return b;
}

// Answers any pending shock with its first option.
inline void answer_shock(Engine& engine) {
  const auto& shock = engine.state().active_shock;
  if (shock && requires_response(shock->kind) && !shock->choice) {
    engine.apply(action::RespondShock{response_options(shock->kind).front()});
  }
}

}  // namespace pathways::test
