/*
 * Copyright 2026 The dtedesign Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dte/io/toml.hpp"  // ConfigError
#include "dte/posterior.hpp"

namespace dte::io {

/// Patient rows in the `arm,enroll_time,time,event` schema: arm 0 = control,
/// times in months, event 1 = observed, 0 = censored.
struct PatientRecord {
    int arm;
    double enroll_time;
    double time;
    int event;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(detail::trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::vector<PatientRecord> read_patient_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty data file: " + path);
    auto header = split_csv_line(detail::trim(line));
    const std::vector<std::string> expected{"arm", "enroll_time", "time",
                                            "event"};
    if (header != expected) {
        throw ConfigError(
            "data file header must be 'arm,enroll_time,time,event'");
    }
    std::vector<PatientRecord> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = detail::trim(line);
        if (s.empty()) continue;
        auto fields = split_csv_line(s);
        if (fields.size() != 4) {
            throw ConfigError("row " + std::to_string(lineno) +
                              ": expected 4 fields");
        }
        PatientRecord r{};
        try {
            r.arm = std::stoi(fields[0]);
            r.enroll_time = std::stod(fields[1]);
            r.time = std::stod(fields[2]);
            r.event = std::stoi(fields[3]);
        } catch (const std::exception&) {
            throw ConfigError("row " + std::to_string(lineno) +
                              ": cannot parse numeric field");
        }
        if ((r.arm != 0 && r.arm != 1) || (r.event != 0 && r.event != 1) ||
            !(r.time >= 0.0) || !(r.enroll_time >= 0.0)) {
            throw ConfigError("row " + std::to_string(lineno) +
                              ": field out of range");
        }
        rows.push_back(r);
    }
    return rows;
}

/// Snapshots built directly from observed rows (no administrative
/// re-censoring; the file already holds observed time and event flag).
inline std::pair<ArmSnapshot, ArmSnapshot> snapshots_from_records(
    const std::vector<PatientRecord>& rows) {
    ArmSnapshot control, treatment;
    for (const auto& r : rows) {
        (r.arm == 0 ? control : treatment).add(r.time, r.event == 1);
    }
    return {control, treatment};
}

inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    }
}

}  // namespace dte::io
