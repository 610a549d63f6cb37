// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace dbnet {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchema = "dbnet/1";

/// FNV-1a 64-bit content digest for report provenance.
inline std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

/// 17-significant-digit decimal, enough to round-trip a double.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Deterministic key = value report document with [section] headers.
class ReportWriter {
  public:
    explicit ReportWriter(const std::string& command) {
        kv("schema", kReportSchema);
        kv("tool_version", kToolVersion);
        kv("command", command);
    }

    void section(const std::string& name) { out_ << "\n[" << name << "]\n"; }
    void kv(const std::string& key, const std::string& value) {
        out_ << key << " = " << value << "\n";
    }
    void kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
    void kv(const std::string& key, double value) { kv(key, format_double(value)); }
    void kv(const std::string& key, bool value) { kv(key, std::string(value ? "true" : "false")); }
    void kv(const std::string& key, long value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }

    std::string str() const { return out_.str(); }

  private:
    std::ostringstream out_;
};

/// CSV with a fixed header; numbers at 17 significant digits.
inline std::string to_csv(const std::string& header,
                          const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k)
            out << (k ? "," : "") << format_double(row[k]);
        out << "\n";
    }
    return out.str();
}

}  // namespace dbnet
