#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "crrmtl/errors.hpp"
#include "crrmtl/report.hpp"

namespace crrmtl::cli {

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream out;
  for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// What was run, with which flags and inputs. Embedded in JSON outputs and
/// written next to CSV outputs as <file>.manifest.json.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> arguments;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::string> input_digests;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"command", command},
                        {"arguments", arguments},
                        {"tool_version", kToolVersion},
                        {"input_digests", input_digests}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    return j;
  }
};

}  // namespace crrmtl::cli
