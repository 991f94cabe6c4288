#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcomm/errors.hpp"
#include "qcomm/graph.hpp"

#ifndef QCOMM_DEFAULT_DATA_DIR
#define QCOMM_DEFAULT_DATA_DIR "data"
#endif

namespace qcomm {

struct DatasetEntry {
  std::string name;
  std::string file;
  GraphFormat format = GraphFormat::edge_list;
  bool weighted_available = false;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::string sha256;  // empty when the fixture is not bundled
  std::string provenance;
};

inline std::span<const DatasetEntry> dataset_registry() {
  static const std::vector<DatasetEntry> entries = {
      {"karate", "karate.edges", GraphFormat::edge_list, true, 34, 78,
       "b15adaa0388e39e7baa3f946e4869acb73e11df00bf3188c89ac413b5dd7006c",
       "Zachary karate club; networkx karate_club_graph(), weights are interaction counts"},
      {"lesmis", "lesmis.edges", GraphFormat::edge_list, true, 77, 254,
       "c6742c91a0e99fb2e462422e1f7f10854ba4ba96c6ef516e3394e229cdea1a66",
       "Les Miserables co-appearances; networkx les_miserables_graph()"},
      {"football", "football.edges", GraphFormat::edge_list, false, 115, 613,
       "6253214b4f151a4ab5f5abcc9d0ced45584d6fdebbaf5509f7cf6c4bd789bd57",
       "American college football 2000 season (Girvan-Newman), football.gml node ids"},
      {"dolphin", "dolphins.edges", GraphFormat::edge_list, false, 62, 159, "",
       "Lusseau bottlenose dolphins; not bundled, place dolphins.edges in the data directory"},
      {"two_triangles", "two_triangles.edges", GraphFormat::edge_list, false, 6, 6,
       "ea602983971c26c85262ef87339ef96a0ea1ee4b6f4aed7157090a37ddec7243",
       "two disjoint triangles, hand written"},
      {"pegase1354", "pegase1354.branches", GraphFormat::branch_table, true, 1354, 1710,
       "f69e92c1039b252c52a46e734bf9cb1ef51af772adaf26af1c77d5a899bb3672",
       "PEGASE 1354-bus case via pandapower case1354pegase(); weight 1/|r + jx| in 1/ohm"},
  };
  return entries;
}

inline const DatasetEntry* find_dataset(std::string_view name) {
  for (const DatasetEntry& e : dataset_registry())
    if (e.name == name) return &e;
  return nullptr;
}

/// $QCOMM_DATA_DIR when set, otherwise the directory compiled in.
inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("QCOMM_DATA_DIR"); env && *env) return env;
  return QCOMM_DEFAULT_DATA_DIR;
}

inline std::filesystem::path dataset_path(const DatasetEntry& e) { return data_dir() / e.file; }

inline bool dataset_present(const DatasetEntry& e) {
  return std::filesystem::is_regular_file(dataset_path(e));
}

/// Branch tables are always weighted; edge lists follow `weighted`.
inline Graph load_dataset(const DatasetEntry& e, bool weighted,
                          std::vector<std::string>* warnings = nullptr) {
  if (!dataset_present(e))
    throw DomainError("dataset '" + e.name + "' is not available at " + dataset_path(e).string());
  return load_graph_file(dataset_path(e).string(), e.format, weighted, warnings);
}

struct DatasetCheck {
  const DatasetEntry* entry = nullptr;
  bool present = false;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::string error;

  bool ok() const {
    return present && error.empty() && nodes == entry->nodes && edges == entry->edges;
  }
};

/// Loads a fixture and recounts nodes and edges.
inline DatasetCheck verify_dataset(const DatasetEntry& e) {
  DatasetCheck c;
  c.entry = &e;
  c.present = dataset_present(e);
  if (!c.present) return c;
  try {
    const Graph g = load_dataset(e, e.weighted_available);
    c.nodes = g.node_count();
    c.edges = g.edge_count();
  } catch (const std::exception& ex) {
    c.error = ex.what();
  }
  return c;
}

/// A registry name or a path to an edge-list file.
inline Graph resolve_graph(std::string_view name_or_path, bool weighted,
                           std::vector<std::string>* warnings = nullptr) {
  if (const DatasetEntry* e = find_dataset(name_or_path)) return load_dataset(*e, weighted, warnings);
  const std::filesystem::path p(name_or_path);
  if (std::filesystem::is_regular_file(p)) {
    const GraphFormat f = p.extension() == ".branches" ? GraphFormat::branch_table
                                                       : GraphFormat::edge_list;
    return load_graph_file(p.string(), f, weighted, warnings);
  }
  std::string names;
  for (const DatasetEntry& d : dataset_registry()) names += (names.empty() ? "" : ", ") + d.name;
  throw DomainError("unknown dataset '" + std::string(name_or_path) + "'; known: " + names);
}

}  // namespace qcomm
