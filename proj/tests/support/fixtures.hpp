#pragma once

#include "iamflood/config.hpp"
#include "iamflood/text.hpp"

#include <string>

namespace testsupport {

inline std::string data_dir() { return IAMFLOOD_DATA_DIR; }
inline std::string toy_config() { return data_dir() + "/toy/toy.cfg"; }
inline std::string zero_rain_config() { return data_dir() + "/toy/zero_rain.cfg"; }
inline std::string crafted_config() { return data_dir() + "/crafted/crafted.cfg"; }

/// A config file's text with extra `key = value` lines overriding or adding keys.
inline iamflood::EpisodeConfig config_with(const std::string& path, const std::string& overrides)
{
  std::string kept;
  const auto content = iamflood::text::read_file(path);
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    bool overridden = false;
    if (eq != std::string::npos) {
      const std::string key(iamflood::text::trim(std::string_view(line).substr(0, eq)));
      std::istringstream ov(overrides);
      std::string o;
      while (std::getline(ov, o))
        if (o.find('=') != std::string::npos &&
            std::string(iamflood::text::trim(std::string_view(o).substr(0, o.find('=')))) == key)
          overridden = true;
    }
    if (!overridden) kept += line + "\n";
  }
  return iamflood::parse_config(kept + overrides, path, std::filesystem::path(path).parent_path());
}

} // namespace testsupport
