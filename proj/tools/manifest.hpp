#pragma once

#include "iamflood/text.hpp"
#include "iamflood/version.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace iamflood::cli {

inline std::string sha256_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 unavailable");
  }
  std::array<char, 65536> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// What a run consumed and produced. No timestamps, so identical runs write
/// identical manifests.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, std::string>> inputs;  // role, path
  std::vector<std::string> outputs;

  void write(const std::string& path) const
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "tool = iamflood " << kVersion << "\n";
    out << "command = " << command << "\n";
    for (const auto& [k, v] : settings) out << "setting." << k << " = " << v << "\n";
    for (const auto& [k, v] : config) out << "config." << k << " = " << v << "\n";
    for (const auto& [role, p] : inputs) out << "input." << role << " = " << p << " sha256:" << sha256_file(p) << "\n";
    for (const auto& o : outputs) out << "output = " << o << "\n";
  }
};

} // namespace iamflood::cli
