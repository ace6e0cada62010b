// Copyright 2026 The Automaton Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace alab {

/// Fixed-length bit-string packed into 64-bit words. Bit i is site i.
class BitString {
  public:
    BitString() = default;
    explicit BitString(std::size_t n_bits) : n_(n_bits), words_((n_bits + 63) / 64, 0) {}

    /// Low 64 bits taken from an integer label; n_bits may exceed 64.
    static BitString from_label(std::size_t n_bits, std::uint64_t label) {
        BitString b(n_bits);
        if (!b.words_.empty()) {
            b.words_[0] = n_bits >= 64 ? label : (label & ((std::uint64_t{1} << n_bits) - 1));
        }
        return b;
    }

    std::size_t size() const noexcept { return n_; }

    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i, bool v) noexcept {
        const std::uint64_t m = std::uint64_t{1} << (i & 63);
        if (v) {
            words_[i >> 6] |= m;
        } else {
            words_[i >> 6] &= ~m;
        }
    }
    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
    void swap_bits(std::size_t i, std::size_t j) noexcept {
        if (get(i) != get(j)) {
            flip(i);
            flip(j);
        }
    }

    /// Integer label; only meaningful when size() <= 64.
    std::uint64_t label() const noexcept { return words_.empty() ? 0 : words_[0]; }

    std::size_t popcount() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    const std::vector<std::uint64_t>& words() const noexcept { return words_; }

    /// Site 0 first.
    std::string to_string() const {
        std::string s(n_, '0');
        for (std::size_t i = 0; i < n_; ++i) {
            if (get(i)) s[i] = '1';
        }
        return s;
    }

    friend bool operator==(const BitString&, const BitString&) = default;

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace alab
