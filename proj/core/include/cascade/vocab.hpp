// Copyright 2026 The Cascade Authors
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

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "cascade/common.hpp"

namespace cascade {

// Token table with four reserved ids at the front. File form is one token
// per line, id == line number.
class Vocab {
 public:
  static constexpr int kBlankId = 0;
  static constexpr int kSosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kUnkId = 3;
  static constexpr int kNumReserved = 4;

  // Creates a vocab holding just the reserved tokens.
  Vocab();

  // Appends a token; throws VocabError on duplicates.
  int add(const std::string& token);

  int size() const { return static_cast<int>(tokens_.size()); }

  const std::string& token(int id) const;

  // Returns kUnkId for unknown tokens.
  int id_of(const std::string& token) const;

  bool contains(const std::string& token) const;

  // Non-reserved ids, in order.
  std::vector<int> content_ids() const;

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

  // Stable fingerprint over the token list (order-sensitive).
  uint64_t fingerprint() const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace cascade
