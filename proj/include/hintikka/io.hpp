#pragma once
// Belief snapshots as text.
//
//   # hintikka belief v1
//   signature P/1
//   kind constituent            (or: cell, label)
//   depth 2
//   <node id>\t<num/den>        one per node, preorder, root first
//
// A node's parent is the closest earlier line one level shallower.

#include "abstraction.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hintikka {

struct SnapshotError : std::runtime_error {
  SnapshotError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

inline constexpr const char* kSnapshotHeader = "# hintikka belief v1";

namespace detail {

// Label trees use '/'-separated paths: "/", "/c", "/c/f".
inline int label_depth(const std::string& path) {
  if (path.empty() || path[0] != '/') throw std::invalid_argument("label path must start with '/'");
  if (path == "/") return 0;
  return static_cast<int>(std::count(path.begin(), path.end(), '/'));
}

inline std::string key_text(const Language& lang, const Constituent& c) { return to_text(lang, c); }
inline std::string key_text(const Language&, const std::string& c) { return c; }
inline std::string key_text(const Language& lang, const Cell& c) { return cell_id(lang, c); }
inline int key_depth(const Constituent& c) { return c.depth; }
inline int key_depth(const Cell& c) { return c.depth; }
inline int key_depth(const std::string& c) { return label_depth(c); }
inline const char* key_kind(const Constituent*) { return "constituent"; }
inline const char* key_kind(const Cell*) { return "cell"; }
inline const char* key_kind(const std::string*) { return "label"; }
inline void parse_key(const Language& lang, const std::string& s, Constituent& out) { out = parse_constituent(lang, s); }
inline void parse_key(const Language& lang, const std::string& s, Cell& out) { out = parse_cell_id(lang, s); }
inline void parse_key(const Language&, const std::string& s, std::string& out) {
  label_depth(s);
  out = s;
}

}  // namespace detail

template <class Key>
std::string save_snapshot(const Language& lang, const BeliefTree<Key>& h) {
  std::ostringstream out;
  out << kSnapshotHeader << "\n"
      << "signature " << lang.signature().key() << "\n"
      << "kind " << detail::key_kind(static_cast<const Key*>(nullptr)) << "\n"
      << "depth " << h.max_depth() << "\n";
  for (int i : h.preorder()) out << detail::key_text(lang, h.key(i)) << "\t" << to_text(h.weight(i)) << "\n";
  return out.str();
}

/// Parses a snapshot; the signature line must match `lang`.
template <class Key>
BeliefTree<Key> load_snapshot(const Language& lang, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next = [&](const std::string& what) {
    if (!std::getline(in, line)) throw SnapshotError(lineno + 1, "missing " + what);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  auto field = [&](const std::string& name) {
    next(name);
    if (line.rfind(name + " ", 0) != 0) throw SnapshotError(lineno, "expected '" + name + "'");
    return line.substr(name.size() + 1);
  };
  next("header");
  if (line != kSnapshotHeader) throw SnapshotError(lineno, "unsupported header '" + line + "'");
  if (field("signature") != lang.signature().key()) throw SnapshotError(lineno, "signature mismatch");
  if (field("kind") != detail::key_kind(static_cast<const Key*>(nullptr))) throw SnapshotError(lineno, "wrong node kind");
  int depth;
  try {
    depth = std::stoi(field("depth"));
  } catch (const std::invalid_argument&) {
    throw SnapshotError(lineno, "bad depth");
  }

  std::optional<BeliefTree<Key>> h;
  std::vector<int> stack;  // stack[d] = last node at depth d
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw SnapshotError(lineno, "expected '<id>\\t<weight>'");
    Key k;
    Rational w;
    try {
      detail::parse_key(lang, line.substr(0, tab), k);
      w = parse_rational(line.substr(tab + 1));
    } catch (const std::exception& e) {
      throw SnapshotError(lineno, e.what());
    }
    const int d = detail::key_depth(k);
    if (!h) {
      if (d != 0) throw SnapshotError(lineno, "first node must be the root");
      h.emplace(k);
      h->set_weight(0, w);
      stack = {0};
      continue;
    }
    if (d < 1 || d > static_cast<int>(stack.size())) throw SnapshotError(lineno, "node has no parent");
    stack.resize(d);
    try {
      stack.push_back(h->add_child(stack[d - 1], k, w));
    } catch (const std::exception& e) {
      throw SnapshotError(lineno, e.what());
    }
  }
  if (!h) throw SnapshotError(lineno, "no nodes");
  if (h->max_depth() != depth) throw SnapshotError(lineno, "depth header disagrees with nodes");
  const std::string bad = h->violations();
  if (!bad.empty()) throw SnapshotError(lineno, bad);
  return *h;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace hintikka
