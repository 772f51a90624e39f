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

#include "cascade/vocab.hpp"

#include <fstream>

namespace cascade {

namespace {
const char* kReserved[] = {"<blank>", "<sos>", "<eos>", "<unk>"};
}

Vocab::Vocab() {
  for (const char* t : kReserved) {
    index_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

int Vocab::add(const std::string& token) {
  if (token.empty()) throw VocabError("empty token");
  if (index_.count(token)) throw VocabError("duplicate token '" + token + "'");
  const int id = static_cast<int>(tokens_.size());
  index_.emplace(token, id);
  tokens_.push_back(token);
  return id;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) {
    throw VocabError("token id " + std::to_string(id) +
                     " out of vocabulary of size " + std::to_string(size()));
  }
  return tokens_[static_cast<size_t>(id)];
}

int Vocab::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocab::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

std::vector<int> Vocab::content_ids() const {
  std::vector<int> ids;
  for (int i = kNumReserved; i < size(); ++i) ids.push_back(i);
  return ids;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocab file " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read vocab file " + path);
  Vocab v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno < kNumReserved) {
      if (line != kReserved[lineno]) {
        throw DataError("vocab file " + path + " line " +
                        std::to_string(lineno) + " must be reserved token '" +
                        kReserved[lineno] + "', got '" + line + "'");
      }
    } else {
      v.add(line);
    }
    ++lineno;
  }
  if (lineno < kNumReserved) {
    throw DataError("vocab file " + path + " is missing reserved tokens");
  }
  return v;
}

uint64_t Vocab::fingerprint() const {
  // FNV-1a over tokens with separators.
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

}  // namespace cascade
