#pragma once

// Statistical stand-in for the attack testbed. Produces labeled attack
// episodes and the length-10 sample windows cut from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "seqids/rng.hpp"
#include "seqids/types.hpp"

namespace seqids {

enum class GeneratorClass : std::uint8_t { Constant, Duplicate, AlertCount, ServerStatistic };

inline std::string_view to_string(GeneratorClass c) {
  switch (c) {
    case GeneratorClass::Constant: return "constant";
    case GeneratorClass::Duplicate: return "duplicate";
    case GeneratorClass::AlertCount: return "alert-count";
    case GeneratorClass::ServerStatistic: return "server-statistic";
  }
  return "unknown";
}

struct AttributeSpec {
  std::string name;
  GeneratorClass generator = GeneratorClass::Constant;
  // Constant: the value. Duplicate: manifest index of the source attribute.
  // AlertCount / ServerStatistic: row into the emission parameter tables.
  double constant_value = 0.0;
  std::size_t slot = 0;
};

inline constexpr std::size_t kNumAttributes = 50;
inline constexpr std::size_t kNumAlertCounts = 4;
inline constexpr std::size_t kNumServerStats = 7;

using PerAction = std::array<double, kNumActions>;

/// Per-action emission parameters. Columns follow AttackAction order.
struct EmissionParams {
  std::array<PerAction, kNumAlertCounts> alert_rates{{
      // Continue, Ping, CVE-17, Login, Install, SQLi, CVE-15
      {0, 10, 48, 10, 10, 62, 110},  // misc-activity
      {0, 4, 4, 4, 6, 4, 4},         // attempted-recon
      {0, 1, 3, 1, 1, 3, 3},         // attempted-admin
      {0, 1, 2, 1, 1, 2, 2},         // web-application-attack
  }};
  std::array<PerAction, kNumServerStats> server_means{{
      {20, 23, 23, 23, 23, 23, 23},                // cpu load
      {2048, 2070, 2070, 2070, 2070, 2070, 2070},  // memory used
      {40, 47, 47, 47, 47, 47, 47},                // tcp connections
      {1, 1, 1, 1, 1, 1, 1},                       // failed logins
      {120, 122, 122, 122, 122, 122, 122},         // processes
      {300, 320, 320, 320, 320, 320, 320},         // disk io
      {500, 560, 560, 560, 560, 560, 560},         // net rx
  }};
  std::array<PerAction, kNumServerStats> server_stddevs{{
      {6, 6, 6, 6, 6, 6, 6},
      {40, 40, 40, 40, 40, 40, 40},
      {10, 10, 10, 10, 10, 10, 10},
      {1.5, 1.5, 1.5, 1.5, 1.5, 1.5, 1.5},
      {4, 4, 4, 4, 4, 4, 4},
      {60, 60, 60, 60, 60, 60, 60},
      {120, 120, 120, 120, 120, 120, 120},
  }};
  // Client traffic that triggers alerts regardless of the attacker.
  double background_rate = 2.0;
};

struct SimConfig {
  std::uint64_t seed = 0;
  double p_geom = 0.2;
  std::size_t episodes_per_type = 200;
  // Scales every stochastic deviation from the per-action mean. At 0 each
  // action emits one fixed observation vector.
  double noise = 1.0;
  double duplicate_scale = 2.0;
  EmissionParams emission{};

  void validate() const {
    if (!(p_geom > 0.0 && p_geom <= 1.0))
      throw ConfigError("p_geom must lie in (0, 1], got " + std::to_string(p_geom));
    if (!(noise >= 0.0) || !std::isfinite(noise))
      throw ConfigError("noise multiplier must be finite and >= 0");
    if (!(duplicate_scale > 0.0))
      throw ConfigError("duplicate_scale must be > 0");
    if (!(emission.background_rate >= 0.0))
      throw ConfigError("background_rate must be >= 0");
    for (const auto& row : emission.alert_rates)
      for (double r : row)
        if (!(r >= 0.0)) throw ConfigError("alert-count rates must be >= 0");
    for (const auto& row : emission.server_stddevs)
      for (double s : row)
        if (!(s > 0.0)) throw ConfigError("server-statistic std-devs must be > 0");
  }
};

/// Fixed 50-attribute layout shared by every episode of every run.
inline const std::vector<AttributeSpec>& attribute_manifest() {
  static const std::vector<AttributeSpec> manifest = [] {
    using G = GeneratorClass;
    std::vector<AttributeSpec> m;
    auto constant = [&m](std::string name, double v) {
      m.push_back({std::move(name), G::Constant, v, 0});
    };
    auto alert = [&m](std::string name, std::size_t slot) {
      m.push_back({std::move(name), G::AlertCount, 0.0, slot});
    };
    auto server = [&m](std::string name, std::size_t slot) {
      m.push_back({std::move(name), G::ServerStatistic, 0.0, slot});
    };
    auto duplicate = [&m](std::string name, std::size_t source) {
      m.push_back({std::move(name), G::Duplicate, 0.0, source});
    };
    constant("host_num_cpus", 4);
    constant("host_mem_total_mb", 8192);
    alert("snort_misc_activity", 0);
    server("host_cpu_load", 0);
    constant("host_disk_total_gb", 256);
    alert("snort_attempted_recon", 1);
    server("host_mem_used_mb", 1);
    constant("host_swap_total_mb", 2048);
    server("net_tcp_connections", 2);
    constant("net_num_interfaces", 2);
    alert("snort_attempted_admin", 2);
    server("auth_failed_logins", 3);
    constant("net_mtu", 1500);
    server("host_processes", 4);
    alert("snort_web_application_attack", 3);
    server("host_disk_io_kbps", 5);
    server("net_rx_kbps", 6);
    duplicate("net_tcp_connections_mirror", 8);
    duplicate("host_mem_used_mirror", 6);
    duplicate("net_rx_mirror", 16);
    constant("snort_rules_loaded", 31842);
    constant("snort_policy_version", 3);
    constant("snort_denial_of_service", 0);
    constant("snort_shellcode_detect", 0);
    constant("snort_trojan_activity", 0);
    constant("snort_suspicious_filename", 0);
    constant("snort_unsuccessful_user", 0);
    constant("snort_default_login_attempt", 0);
    constant("snort_non_standard_protocol", 0);
    constant("snort_string_detect", 0);
    constant("snort_icmp_event", 0);
    constant("snort_rpc_portmap_decode", 0);
    constant("host_kernel_release_id", 515);
    constant("host_boot_epoch", 1690000000);
    constant("host_num_users", 12);
    constant("host_cpu_mhz", 2400);
    constant("host_page_size", 4096);
    constant("host_open_file_limit", 1048576);
    constant("host_num_disks", 2);
    constant("host_swap_used_mb", 0);
    constant("net_arp_entries", 9);
    constant("net_routes", 4);
    constant("net_udp_listeners", 3);
    constant("net_tcp_listeners", 7);
    constant("net_link_speed_mbps", 1000);
    constant("svc_http_workers", 8);
    constant("svc_ssh_max_sessions", 10);
    constant("svc_db_pool_size", 20);
    constant("svc_smb_shares", 2);
    constant("svc_dns_forwarders", 2);
    return m;
  }();
  return manifest;
}

inline std::vector<std::string> attribute_names() {
  std::vector<std::string> names;
  for (const auto& a : attribute_manifest()) names.push_back(a.name);
  return names;
}

using Observation = std::vector<double>;

struct Episode {
  std::uint64_t episode_id = 0;
  AttackType attack_type = AttackType::Type1;
  std::size_t t_start = 1;  // 1-based
  ActionSequence actions;   // actions[t-1] is the action at step t
  std::vector<Observation> observations;

  std::size_t length() const { return actions.size(); }
};

/// Length-10 slice of an episode that always contains the intrusion start.
/// An unlabeled window has an empty action list.
struct SampleWindow {
  std::uint64_t episode_id = 0;
  AttackType attack_type = AttackType::Type1;
  std::size_t t_rand = 0;         // 1-based window start in the episode; 0 if unknown
  std::size_t t_start_local = 0;  // 1..10; 0 if unlabeled
  ActionSequence actions;
  std::vector<Observation> observations;

  bool labeled() const { return !actions.empty(); }
};

struct Dataset {
  std::vector<std::string> attribute_names;
  std::vector<SampleWindow> windows;
};

/// Draws t_start ~ Ge(p) on {1, 2, ...}.
inline std::size_t sample_start_time(const SimConfig& config, Rng& rng) {
  if (!(config.p_geom > 0.0 && config.p_geom <= 1.0))
    throw ConfigError("p_geom must lie in (0, 1], got " + std::to_string(config.p_geom));
  if (config.p_geom == 1.0) return 1;
  std::geometric_distribution<std::size_t> failures(config.p_geom);
  return failures(rng) + 1;
}

namespace detail {

inline double draw_alert_count(double rate, double noise, Rng& rng) {
  if (rate <= 0.0) return 0.0;
  double x = static_cast<double>(std::poisson_distribution<long>(rate)(rng));
  return std::max(0.0, std::round(rate + noise * (x - rate)));
}

inline Observation emit(const SimConfig& config, AttackAction action, Rng& rng) {
  const auto& manifest = attribute_manifest();
  const auto& em = config.emission;
  const std::size_t a = index_of(action);
  Observation obs(manifest.size(), 0.0);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& spec = manifest[i];
    switch (spec.generator) {
      case GeneratorClass::Constant:
        obs[i] = spec.constant_value;
        break;
      case GeneratorClass::AlertCount:
        obs[i] = draw_alert_count(em.alert_rates[spec.slot][a] + em.background_rate,
                                  config.noise, rng);
        break;
      case GeneratorClass::ServerStatistic: {
        double z = std::normal_distribution<double>(0.0, 1.0)(rng);
        obs[i] = em.server_means[spec.slot][a] +
                 config.noise * em.server_stddevs[spec.slot][a] * z;
        break;
      }
      case GeneratorClass::Duplicate:
        break;  // filled below, once sources are known
    }
  }
  for (std::size_t i = 0; i < manifest.size(); ++i)
    if (manifest[i].generator == GeneratorClass::Duplicate)
      obs[i] = config.duplicate_scale * obs[manifest[i].slot];
  return obs;
}

}  // namespace detail

/// Episode with a given intrusion start: t_start - 1 Continue steps followed
/// by the 17 canonical actions of the attack type.
inline Episode generate_episode_at(const SimConfig& config, AttackType type,
                                   std::size_t t_start, Rng& rng,
                                   std::uint64_t episode_id = 0) {
  if (t_start < 1) throw ConfigError("t_start must be >= 1");
  Episode ep;
  ep.episode_id = episode_id;
  ep.attack_type = type;
  ep.t_start = t_start;
  ep.actions.assign(t_start - 1, AttackAction::Continue);
  const auto& steps = attack_steps(type);
  ep.actions.insert(ep.actions.end(), steps.begin(), steps.end());
  ep.observations.reserve(ep.actions.size());
  for (AttackAction a : ep.actions) ep.observations.push_back(detail::emit(config, a, rng));
  return ep;
}

inline Episode generate_episode(const SimConfig& config, AttackType type, Rng& rng,
                                std::uint64_t episode_id = 0) {
  config.validate();
  std::size_t t_start = sample_start_time(config, rng);
  return generate_episode_at(config, type, t_start, rng, episode_id);
}

/// t_rand is uniform over [t_start - 9, t_start], clipped below at 1.
inline SampleWindow cut_window(const Episode& episode, Rng& rng) {
  const std::size_t hi = episode.t_start;
  const std::size_t lo = hi > kWindowLength - 1 ? hi - (kWindowLength - 1) : 1;
  const std::size_t t_rand = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  if (t_rand + kWindowLength - 1 > episode.length())
    throw DataError("episode too short for a window");

  SampleWindow w;
  w.episode_id = episode.episode_id;
  w.attack_type = episode.attack_type;
  w.t_rand = t_rand;
  w.t_start_local = episode.t_start - t_rand + 1;
  auto first = static_cast<std::ptrdiff_t>(t_rand - 1);
  auto last = first + static_cast<std::ptrdiff_t>(kWindowLength);
  w.actions.assign(episode.actions.begin() + first, episode.actions.begin() + last);
  w.observations.assign(episode.observations.begin() + first,
                        episode.observations.begin() + last);
  return w;
}

/// One window per episode; Type1 episodes get ids [0, n), Type2 [n, 2n).
/// Every episode draws from its own stream keyed by (seed, episode_id).
inline Dataset generate_dataset(const SimConfig& config) {
  config.validate();
  Dataset ds;
  ds.attribute_names = attribute_names();
  ds.windows.reserve(2 * config.episodes_per_type);
  for (AttackType type : kAllTypes) {
    for (std::size_t i = 0; i < config.episodes_per_type; ++i) {
      const std::uint64_t id = index_of(type) * config.episodes_per_type + i;
      Rng rng = make_stream(config.seed, StreamTag::Episode, id);
      Episode ep = generate_episode(config, type, rng, id);
      ds.windows.push_back(cut_window(ep, rng));
    }
  }
  return ds;
}

}  // namespace seqids
