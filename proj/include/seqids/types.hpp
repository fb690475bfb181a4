#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqids {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters passed to a generator, trainer or experiment.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed, missing or inconsistent input data.
class DataError : public Error {
public:
  using Error::Error;
};

/// Attacker action at one time step. Continue is the rest action taken
/// before the intrusion starts; it is always index 0.
enum class AttackAction : std::uint8_t {
  Continue = 0,
  PingScan,
  Cve2017_7494,
  NetworkServiceLogin,
  InstallTools,
  DvwaSqlInjection,
  Cve2015_1427,
};

inline constexpr std::size_t kNumActions = 7;
inline constexpr std::size_t kAttackLength = 17;
inline constexpr std::size_t kWindowLength = 10;

inline constexpr std::array<AttackAction, kNumActions> kAllActions{
    AttackAction::Continue,         AttackAction::PingScan,
    AttackAction::Cve2017_7494,     AttackAction::NetworkServiceLogin,
    AttackAction::InstallTools,     AttackAction::DvwaSqlInjection,
    AttackAction::Cve2015_1427,
};

enum class AttackType : std::uint8_t { Type1 = 0, Type2 = 1 };

inline constexpr std::array<AttackType, 2> kAllTypes{AttackType::Type1,
                                                     AttackType::Type2};

using ActionSequence = std::vector<AttackAction>;

constexpr std::size_t index_of(AttackAction a) { return static_cast<std::size_t>(a); }
constexpr std::size_t index_of(AttackType t) { return static_cast<std::size_t>(t); }

inline AttackAction action_at(std::size_t index) {
  if (index >= kNumActions)
    throw DataError("action index " + std::to_string(index) + " out of range");
  return static_cast<AttackAction>(index);
}

/// Canonical 17-step action list of each attack type.
inline const std::array<AttackAction, kAttackLength>& attack_steps(AttackType type) {
  using A = AttackAction;
  static constexpr std::array<AttackAction, kAttackLength> type1{
      A::PingScan,     A::Cve2017_7494,        A::NetworkServiceLogin,
      A::InstallTools, A::PingScan,            A::DvwaSqlInjection,
      A::NetworkServiceLogin, A::InstallTools, A::PingScan,
      A::Cve2015_1427, A::NetworkServiceLogin, A::InstallTools,
      A::PingScan,     A::Cve2017_7494,        A::NetworkServiceLogin,
      A::InstallTools, A::PingScan,
  };
  static constexpr std::array<AttackAction, kAttackLength> type2{
      A::PingScan,            A::InstallTools,     A::NetworkServiceLogin,
      A::InstallTools,        A::NetworkServiceLogin, A::DvwaSqlInjection,
      A::Cve2017_7494,        A::NetworkServiceLogin, A::Cve2017_7494,
      A::PingScan,            A::PingScan,         A::InstallTools,
      A::NetworkServiceLogin, A::PingScan,         A::Cve2015_1427,
      A::PingScan,            A::InstallTools,
  };
  return type == AttackType::Type1 ? type1 : type2;
}

inline std::string_view to_string(AttackAction a) {
  switch (a) {
    case AttackAction::Continue: return "continue";
    case AttackAction::PingScan: return "ping_scan";
    case AttackAction::Cve2017_7494: return "cve_2017_7494";
    case AttackAction::NetworkServiceLogin: return "network_service_login";
    case AttackAction::InstallTools: return "install_tools";
    case AttackAction::DvwaSqlInjection: return "dvwa_sql_injection";
    case AttackAction::Cve2015_1427: return "cve_2015_1427";
  }
  return "unknown";
}

inline std::string_view to_string(AttackType t) {
  return t == AttackType::Type1 ? "type1" : "type2";
}

inline AttackAction parse_action(std::string_view name) {
  for (AttackAction a : kAllActions)
    if (to_string(a) == name) return a;
  throw DataError("unknown attack action '" + std::string(name) + "'");
}

inline AttackType parse_attack_type(std::string_view name) {
  for (AttackType t : kAllTypes)
    if (to_string(t) == name) return t;
  throw DataError("unknown attack type '" + std::string(name) + "'");
}

/// 1-based index of the first non-Continue action, or nullopt when the
/// sequence contains no attack step.
inline std::optional<std::size_t> first_attack_step(const ActionSequence& actions) {
  for (std::size_t t = 0; t < actions.size(); ++t)
    if (actions[t] != AttackAction::Continue) return t + 1;
  return std::nullopt;
}

}  // namespace seqids
