/*
 * Copyright 2026 The hdrbench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// CPU time and package energy of child processes.
//
// Energy comes from the powercap RAPL interface:
//   <root>/<domain>/energy_uj            running counter in microjoules
//   <root>/<domain>/max_energy_range_uj  value at which the counter wraps
// Energy figures include idle draw; no baseline is subtracted.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <numeric>
#include <optional>
#include <shared_mutex>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hdrbench/error.hpp"
#include "hdrbench/process.hpp"

namespace hdrbench {

struct MeasurementSample {
  double wall_time = 0.0;  // s
  double cpu_time = 0.0;   // s, user + system of the child
  std::optional<double> energy;  // J
  bool pinned = false;

  friend bool operator==(const MeasurementSample&, const MeasurementSample&) = default;
};

struct AggregatedMeasurement {
  std::vector<MeasurementSample> samples;
  double mean_wall_time = 0.0;
  double mean_cpu_time = 0.0;
  std::optional<double> mean_energy;
  std::size_t retained_count = 0;
  std::vector<std::string> warnings;

  friend bool operator==(const AggregatedMeasurement&, const AggregatedMeasurement&) = default;
};

struct EnergyCounterSnapshot {
  std::uint64_t energy_uj = 0;
  std::uint64_t max_range_uj = 0;
};

struct RaplDomain {
  std::filesystem::path root = "/sys/class/powercap";
  std::string domain = "intel-rapl:0";

  std::filesystem::path path() const { return root / domain; }
};

namespace detail {

inline std::uint64_t read_counter_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto b = text.find_first_not_of(" \t\r\n");
  const auto e = text.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) throw ParseError(file.string() + " is empty");
  std::string_view digits(text.data() + b, e - b + 1);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw ParseError(file.string() + ": '" + std::string(digits) + "' is not an unsigned integer");
  }
  return value;
}

}  // namespace detail

/// Reads one RAPL domain. Returns nullopt when the platform does not expose
/// it; throws ParseError on malformed contents.
inline std::optional<EnergyCounterSnapshot> read_counter(const std::filesystem::path& domain_path) {
  const auto energy_file = domain_path / "energy_uj";
  const auto range_file = domain_path / "max_energy_range_uj";
  std::error_code ec;
  if (!std::filesystem::is_regular_file(energy_file, ec) || !std::filesystem::is_regular_file(range_file, ec)) {
    return std::nullopt;
  }
  EnergyCounterSnapshot s;
  try {
    s.energy_uj = detail::read_counter_file(energy_file);
    s.max_range_uj = detail::read_counter_file(range_file);
  } catch (const IoError&) {
    // Present but unreadable, e.g. root-only permissions.
    return std::nullopt;
  }
  if (s.max_range_uj == 0 || s.energy_uj >= s.max_range_uj) {
    throw ParseError(domain_path.string() + ": counter " + std::to_string(s.energy_uj) + " outside range " +
                     std::to_string(s.max_range_uj));
  }
  return s;
}

/// Energy between two snapshots in joules, allowing one counter wrap.
inline double energy_delta(const EnergyCounterSnapshot& before, const EnergyCounterSnapshot& after) {
  if (before.max_range_uj != after.max_range_uj) {
    throw ValidationError("RAPL snapshots disagree on the counter range");
  }
  const std::uint64_t range = before.max_range_uj;
  const std::uint64_t delta_uj = (after.energy_uj + range - before.energy_uj) % range;
  return static_cast<double>(delta_uj) * 1e-6;
}

struct AggregateOptions {
  /// Drop one minimum and one maximum per metric when at least
  /// kOutlierMinSamples samples are available.
  bool drop_extremes = true;
};

inline constexpr std::size_t kOutlierMinSamples = 4;

namespace detail {

inline double trimmed_mean(std::vector<double> values, bool drop_extremes) {
  if (drop_extremes && values.size() >= kOutlierMinSamples) {
    std::sort(values.begin(), values.end());
    values.erase(values.begin());
    values.pop_back();
  }
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace detail

inline AggregatedMeasurement aggregate(std::vector<MeasurementSample> samples, const AggregateOptions& options = {}) {
  if (samples.empty()) throw ValidationError("cannot aggregate an empty sample list");
  AggregatedMeasurement m;
  std::vector<double> wall, cpu, energy;
  bool all_energy = true;
  for (const auto& s : samples) {
    wall.push_back(s.wall_time);
    cpu.push_back(s.cpu_time);
    if (s.energy) {
      energy.push_back(*s.energy);
    } else {
      all_energy = false;
    }
  }
  m.mean_wall_time = detail::trimmed_mean(wall, options.drop_extremes);
  m.mean_cpu_time = detail::trimmed_mean(cpu, options.drop_extremes);
  if (all_energy) m.mean_energy = detail::trimmed_mean(energy, options.drop_extremes);
  m.retained_count =
      options.drop_extremes && samples.size() >= kOutlierMinSamples ? samples.size() - 2 : samples.size();
  m.samples = std::move(samples);
  return m;
}

/// Process-wide lock: measured runs take it exclusively, auxiliary tools
/// that must not overlap a measurement take it shared.
inline std::shared_mutex& measurement_mutex() {
  static std::shared_mutex m;
  return m;
}

class MeasurementFailed : public ProcessError {
 public:
  using ProcessError::ProcessError;
};

struct MeasureOptions {
  std::size_t repetitions = 5;
  std::optional<RaplDomain> rapl = RaplDomain{};
  bool pin_to_single_cpu = true;
  AggregateOptions aggregate;
  /// Keep stdout of the final repetition in `last_stdout`.
  bool capture_stdout = false;
};

struct MeasuredRun {
  AggregatedMeasurement measurement;
  std::string last_stdout;
};

/// Runs `command` to completion `repetitions` times, one after another,
/// never overlapping any other measurement in this process.
inline MeasuredRun measure_process(const std::string& command, const MeasureOptions& options = {}) {
  if (options.repetitions < 1) throw ValidationError("repetitions must be at least 1");
  std::unique_lock lock(measurement_mutex());

  MeasuredRun run;
  std::vector<MeasurementSample> samples;
  bool rapl_missing = false;
  bool pin_missing = false;
  for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
    std::optional<EnergyCounterSnapshot> before;
    if (options.rapl) before = read_counter(options.rapl->path());

    ProcessOptions popts;
    popts.pin_to_single_cpu = options.pin_to_single_cpu;
    popts.capture_stdout = options.capture_stdout;
    ProcessResult res = run_shell(command, popts);

    std::optional<EnergyCounterSnapshot> after;
    if (before) after = read_counter(options.rapl->path());

    if (res.exit_code != 0) {
      throw MeasurementFailed("measured command exited with " + std::to_string(res.exit_code) + " on repetition " +
                                  std::to_string(rep + 1) + ": " + command,
                              res.exit_code);
    }
    MeasurementSample s;
    s.wall_time = res.wall_seconds;
    s.cpu_time = res.cpu_seconds();
    s.pinned = res.pinned;
    if (before && after) {
      s.energy = energy_delta(*before, *after);
    } else {
      rapl_missing = true;
    }
    if (options.pin_to_single_cpu && !res.pinned) pin_missing = true;
    samples.push_back(s);
    if (rep + 1 == options.repetitions) run.last_stdout = std::move(res.stdout_text);
  }
  run.measurement = aggregate(std::move(samples), options.aggregate);
  if (options.rapl && rapl_missing) {
    run.measurement.warnings.push_back("RAPL domain " + options.rapl->path().string() +
                                       " unavailable; energy omitted");
  }
  if (pin_missing) run.measurement.warnings.push_back("could not pin the measured process to one CPU");
  return run;
}

}  // namespace hdrbench
