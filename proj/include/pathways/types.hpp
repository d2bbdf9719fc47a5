#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace pathways {

enum class CarrierKind {
  electricity,
  heatingOil,
  motorFuel,
  gas,
  nuclearFuel,
  coal,
  wood,
  biofuel,
  biogas,
  waste,
  districtHeat,
  ambientRenewable,  // direct solar, wind and hydro inflow
};

enum class Sector { households, industry, services, transport, agriculture };

enum class TechnologyKind { nuclear, river, reservoir, solar, wind, gas, biomass, biogas, waste };

enum class Season { summer, winter };

template <typename E>
struct EnumTraits;

template <>
struct EnumTraits<CarrierKind> {
  static constexpr std::array<std::string_view, 12> names{
      "electricity", "heatingOil", "motorFuel", "gas",          "nuclearFuel",  "coal",
      "wood",        "biofuel",    "biogas",    "waste",        "districtHeat", "ambientRenewable"};
};

template <>
struct EnumTraits<Sector> {
  static constexpr std::array<std::string_view, 5> names{"households", "industry", "services",
                                                         "transport", "agriculture"};
};

template <>
struct EnumTraits<TechnologyKind> {
  static constexpr std::array<std::string_view, 9> names{
      "nuclear", "river", "reservoir", "solar", "wind", "gas", "biomass", "biogas", "waste"};
};

template <>
struct EnumTraits<Season> {
  static constexpr std::array<std::string_view, 2> names{"summer", "winter"};
};

template <typename E>
inline constexpr std::size_t enum_count = EnumTraits<E>::names.size();

template <typename E>
constexpr std::string_view to_string(E value) {
  return EnumTraits<E>::names[static_cast<std::size_t>(value)];
}

template <typename E>
constexpr std::optional<E> parse_enum(std::string_view text) {
  const auto& names = EnumTraits<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <typename E>
constexpr std::array<E, enum_count<E>> all_values() {
  std::array<E, enum_count<E>> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
  return out;
}

// Dense table keyed by an enumeration.
template <typename E, typename T>
class EnumArray {
 public:
  constexpr EnumArray() = default;
  constexpr explicit EnumArray(const T& fill) { values_.fill(fill); }

  constexpr T& operator[](E key) { return values_[static_cast<std::size_t>(key)]; }
  constexpr const T& operator[](E key) const { return values_[static_cast<std::size_t>(key)]; }

  constexpr auto begin() { return values_.begin(); }
  constexpr auto end() { return values_.end(); }
  constexpr auto begin() const { return values_.begin(); }
  constexpr auto end() const { return values_.end(); }
  static constexpr std::size_t size() { return enum_count<E>; }

  bool operator==(const EnumArray&) const = default;

 private:
  std::array<T, enum_count<E>> values_{};
};

using CarrierValues = EnumArray<CarrierKind, double>;
using SectorValues = EnumArray<Sector, double>;
using TechValues = EnumArray<TechnologyKind, double>;
using ConsumptionTable = EnumArray<CarrierKind, SectorValues>;

inline constexpr double kTjPerGwh = 3.6;

constexpr double gwh_to_tj(double gwh) { return gwh * kTjPerGwh; }
constexpr double tj_to_gwh(double tj) { return tj / kTjPerGwh; }

}  // namespace pathways
