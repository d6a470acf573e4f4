// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wavepacket-spaces Authors

#pragma once

#include <sodium.h>

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "wavepacket/frames.hpp"

namespace wavepacket {

inline nlohmann::json index_to_json(const WPIndex& i) {
  if (i.is_zero()) return "zero";
  return nlohmann::json::array({i.j, i.m, i.l});
}

inline WPIndex index_from_json(const nlohmann::json& v) {
  if (v.is_string() && v.get<std::string>() == "zero") return WPIndex::zero();
  if (!v.is_array() || v.size() != 3) throw FormatError("index must be \"zero\" or [j, m, l]");
  WPIndex i{v[0].get<int>(), v[1].get<int>(), v[2].get<int>()};
  if (i.j < 1) throw FormatError("index level must be positive");
  return i;
}

namespace detail {

inline std::string base64_encode(const std::string& raw) {
  std::string out(sodium_base64_ENCODED_LEN(raw.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), reinterpret_cast<const unsigned char*>(raw.data()), raw.size(),
                    sodium_base64_VARIANT_ORIGINAL);
  out.pop_back();
  return out;
}

inline std::string base64_decode(const std::string& text) {
  std::string out(text.size() / 4 * 3 + 3, '\0');
  std::size_t len = 0;
  if (sodium_base642bin(reinterpret_cast<unsigned char*>(out.data()), out.size(), text.data(), text.size(),
                        nullptr, &len, nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw FormatError("invalid base64 payload");
  }
  out.resize(len);
  return out;
}

}  // namespace detail

// Blocks carry their window and a base64 payload of little-endian f64 (re, im) pairs.
inline nlohmann::json tensor_to_json(const CoefficientTensor& c) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const CoefficientBlock& b : c.blocks) {
    std::string raw;
    raw.reserve(b.values.size() * 16);
    for (const cplx& z : b.values) {
      detail::put_le<double>(raw, z.real());
      detail::put_le<double>(raw, z.imag());
    }
    blocks.push_back({{"index", index_to_json(b.index)},
                      {"k1", b.k1},
                      {"k2", b.k2},
                      {"payload", detail::base64_encode(raw)}});
  }
  return {{"format", "wpcoef1"},
          {"alpha", c.spec.alpha},
          {"beta", c.spec.beta},
          {"epsilon", c.spec.epsilon},
          {"n_const", c.spec.n_const},
          {"jmax", c.j_max},
          {"delta", c.delta},
          {"grid", {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"half_extent", c.grid.half_extent}}},
          {"blocks", std::move(blocks)}};
}

inline CoefficientTensor tensor_from_json(const nlohmann::json& v) {
  try {
    if (v.at("format") != "wpcoef1") throw FormatError("unknown coefficient format");
    CoefficientTensor c;
    c.spec = {v.at("alpha").get<double>(), v.at("beta").get<double>(), v.at("epsilon").get<double>(),
              v.at("n_const").get<int>()};
    c.j_max = v.at("jmax").get<int>();
    c.delta = v.at("delta").get<double>();
    const auto& g = v.at("grid");
    c.grid = {g.at("nx").get<std::uint32_t>(), g.at("ny").get<std::uint32_t>(), g.at("half_extent").get<double>()};
    for (const auto& jb : v.at("blocks")) {
      CoefficientBlock b;
      b.index = index_from_json(jb.at("index"));
      b.k1 = jb.at("k1").get<int>();
      b.k2 = jb.at("k2").get<int>();
      if (b.k1 < 0 || b.k2 < 0) throw FormatError("negative window");
      const std::string raw = detail::base64_decode(jb.at("payload").get<std::string>());
      const std::size_t n = static_cast<std::size_t>(2 * b.k1 + 1) * static_cast<std::size_t>(2 * b.k2 + 1);
      if (raw.size() != 16 * n) throw FormatError("payload size does not match window");
      b.values.resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        const double re = detail::get_le<double>(raw, 16 * k), im = detail::get_le<double>(raw, 16 * k + 8);
        if (!std::isfinite(re) || !std::isfinite(im)) throw FormatError("non-finite coefficient");
        b.values[k] = {re, im};
      }
      c.blocks.push_back(std::move(b));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed coefficient file: ") + e.what());
  }
}

inline void write_tensor(const CoefficientTensor& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::ios_base::failure("cannot open " + path);
  os << tensor_to_json(c).dump() << '\n';
  if (!os) throw std::ios_base::failure("write failed: " + path);
}

inline CoefficientTensor read_tensor(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::ios_base::failure("cannot open " + path);
  nlohmann::json v;
  try {
    is >> v;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed coefficient file: ") + e.what());
  }
  return tensor_from_json(v);
}

}  // namespace wavepacket
