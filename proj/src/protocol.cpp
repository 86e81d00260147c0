// Copyright 2026 The pathtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pathtrace/protocol.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "pathtrace/errors.hpp"

namespace pathtrace {

Protocol::Protocol(double duration, RealMatrix values)
    : duration_(duration), values_(std::move(values)) {
  if (!std::isfinite(duration_) || duration_ < 0.0) {
    throw ArgumentError("protocol duration must be finite and >= 0");
  }
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ArgumentError("protocol needs at least one control and one segment");
  }
  if (!values_.allFinite()) {
    throw ArgumentError("protocol values must be finite");
  }
}

Protocol Protocol::zeros(double duration, std::size_t n_controls,
                         std::size_t n_segments) {
  return Protocol(duration,
                  RealMatrix::Zero(static_cast<Eigen::Index>(n_controls),
                                   static_cast<Eigen::Index>(n_segments)));
}

Protocol rescale(const Protocol& p, double new_duration) {
  if (!(new_duration >= 0.0)) {
    throw ArgumentError("rescale: duration must be >= 0");
  }
  return Protocol(new_duration, p.values());
}

RealVector as_parameter_vector(const Protocol& p) {
  const auto m = static_cast<Eigen::Index>(p.n_controls());
  const auto n = static_cast<Eigen::Index>(p.n_segments());
  RealVector out(m * n);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      out(j * n + k) = p.values()(j, k);
    }
  }
  return out;
}

Protocol from_parameter_vector(double duration, std::size_t n_controls,
                               std::size_t n_segments,
                               std::span<const double> params) {
  if (params.size() != n_controls * n_segments) {
    throw ArgumentError("parameter vector has length " +
                        std::to_string(params.size()) + ", expected " +
                        std::to_string(n_controls * n_segments));
  }
  const auto m = static_cast<Eigen::Index>(n_controls);
  const auto n = static_cast<Eigen::Index>(n_segments);
  RealMatrix values(m, n);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      values(j, k) = params[static_cast<std::size_t>(j * n + k)];
    }
  }
  return Protocol(duration, std::move(values));
}

double implied_bandwidth(const Protocol& p) {
  if (p.duration() <= 0.0) {
    throw ArgumentError("implied_bandwidth: undefined for zero duration");
  }
  return static_cast<double>(p.n_segments()) / (2.0 * p.duration());
}

Protocol concatenate(const Protocol& first, const Protocol& second) {
  if (first.n_controls() != second.n_controls()) {
    throw ArgumentError("concatenate: control counts differ");
  }
  if (first.segment_duration() != second.segment_duration()) {
    throw ArgumentError("concatenate: segment lengths differ");
  }
  RealMatrix values(first.values().rows(),
                    first.values().cols() + second.values().cols());
  values << first.values(), second.values();
  return Protocol(first.duration() + second.duration(), std::move(values));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() && used > 0) return v;
  }
  throw ConfigError("field '" + field + "': expected a number, got " +
                    j.dump());
}

nlohmann::json protocol_to_json(const Protocol& p, const ProtocolMeta& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index j = 0; j < p.values().rows(); ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < p.values().cols(); ++k) {
      row.push_back(format_double(p.values()(j, k)));
    }
    rows.push_back(std::move(row));
  }
  return {{"T", format_double(p.duration())},
          {"N", p.n_segments()},
          {"M", p.n_controls()},
          {"values", std::move(rows)},
          {"meta", {{"seed", meta.seed}, {"task", meta.task}}}};
}

Protocol protocol_from_json(const nlohmann::json& j, ProtocolMeta* meta) {
  try {
    const double duration = parse_double(j.at("T"), "T");
    const auto n = j.at("N").get<std::size_t>();
    const auto m = j.at("M").get<std::size_t>();
    const auto& rows = j.at("values");
    if (!rows.is_array() || rows.size() != m) {
      throw ConfigError("field 'values': expected " + std::to_string(m) +
                        " rows");
    }
    RealMatrix values(static_cast<Eigen::Index>(m),
                      static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < m; ++r) {
      if (!rows[r].is_array() || rows[r].size() != n) {
        throw ConfigError("field 'values[" + std::to_string(r) +
                          "]': expected " + std::to_string(n) + " entries");
      }
      for (std::size_t k = 0; k < n; ++k) {
        values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
            parse_double(rows[r][k], "values");
      }
    }
    if (meta != nullptr && j.contains("meta")) {
      const auto& mj = j.at("meta");
      meta->seed = mj.value("seed", std::uint64_t{0});
      meta->task = mj.value("task", std::string{});
    }
    return Protocol(duration, std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("protocol JSON: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("protocol JSON: ") + e.what());
  }
}

}  // namespace pathtrace
