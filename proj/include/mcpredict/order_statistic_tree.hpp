// Copyright 2026 The mcpredict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCPREDICT_ORDER_STATISTIC_TREE_HPP_
#define MCPREDICT_ORDER_STATISTIC_TREE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcpredict {

// Set of distinct 64-bit keys kept in a treap whose nodes carry subtree
// sizes, so rank queries run in expected O(log n). Nodes live in a pool and
// are addressed by 32-bit indices; erased nodes are recycled.
class OrderStatisticTree {
 public:
  OrderStatisticTree() = default;

  // Inserting a key that is already present is a no-op.
  void Insert(std::uint64_t key);
  // Returns false if the key was absent.
  bool Erase(std::uint64_t key);
  bool Contains(std::uint64_t key) const;

  // Number of keys strictly greater than `key`.
  std::size_t CountGreater(std::uint64_t key) const;

  std::size_t size() const { return Size(root_); }
  bool empty() const { return root_ == kNil; }
  void Reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  using Index = std::uint32_t;
  static constexpr Index kNil = 0xffffffffu;

  struct Node {
    std::uint64_t key;
    std::uint32_t priority;
    std::uint32_t size;
    Index left;
    Index right;
  };

  std::uint32_t Size(Index t) const { return t == kNil ? 0 : nodes_[t].size; }
  void Update(Index t) {
    nodes_[t].size = 1 + Size(nodes_[t].left) + Size(nodes_[t].right);
  }
  // Splits `t` into keys < key and keys >= key.
  void Split(Index t, std::uint64_t key, Index* lo, Index* hi);
  Index Merge(Index lo, Index hi);
  Index NewNode(std::uint64_t key);
  std::uint32_t NextPriority();

  std::vector<Node> nodes_;
  std::vector<Index> free_;
  Index root_ = kNil;
  std::uint64_t prng_state_ = 0x853c49e6748fea9bULL;
};

}  // namespace mcpredict

#endif  // MCPREDICT_ORDER_STATISTIC_TREE_HPP_
