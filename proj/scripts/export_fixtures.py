#!/usr/bin/env python3
"""Regenerate the bundled graph fixtures under data/.

Sources:
  karate, lesmis   networkx (karate_club_graph, les_miserables_graph)
  football         Newman's football.gml (pass its path with --football-gml)
  pegase1354       pandapower.networks.case1354pegase(), exported as a
                   branch table "u v r_ohm x_ohm" (lines, then transformers)

Usage:
  python3 scripts/export_fixtures.py --out data --football-gml football.gml
"""

import argparse
import hashlib
import pathlib

import networkx as nx


def write_edges(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        for line in header:
            f.write(f"# {line}\n")
        for row in rows:
            f.write(" ".join(str(c) for c in row) + "\n")


def export_karate(out):
    g = nx.karate_club_graph()
    rows = [(u, v, int(d["weight"])) for u, v, d in g.edges(data=True)]
    write_edges(out / "karate.edges",
                ["Zachary karate club, networkx karate_club_graph()",
                 "columns: u v weight (interaction counts)",
                 f"nodes {g.number_of_nodes()} edges {g.number_of_edges()}"],
                rows)


def export_lesmis(out):
    g = nx.les_miserables_graph()
    rows = [(u, v, int(d["weight"])) for u, v, d in g.edges(data=True)]
    write_edges(out / "lesmis.edges",
                ["Les Miserables co-appearance network, networkx les_miserables_graph()",
                 "columns: u v weight (co-appearance counts)",
                 f"nodes {g.number_of_nodes()} edges {g.number_of_edges()}"],
                rows)


def export_football(out, gml):
    g = nx.read_gml(gml, label="id")
    rows = [(u, v) for u, v in g.edges()]
    write_edges(out / "football.edges",
                ["American college football 2000, M. Newman football.gml",
                 "columns: u v (node ids of the GML file)",
                 f"nodes {g.number_of_nodes()} edges {g.number_of_edges()}"],
                rows)


def export_pegase(out):
    import pandapower.networks as pn
    import pandapower.topology as top

    net = pn.case1354pegase()
    mg = top.create_nxgraph(net, calc_branch_impedances=True, multi=True,
                            include_impedances=True)
    branches = []
    for u, v, key, d in mg.edges(keys=True, data=True):
        kind, idx = key[0], int(key[1])
        branches.append(((kind, idx), int(u), int(v), d["r_ohm"], d["x_ohm"]))
    branches.sort(key=lambda b: b[0])
    rows = [(u, v, repr(float(r)), repr(float(x))) for _, u, v, r, x in branches]
    write_edges(out / "pegase1354.branches",
                ["Case 1354pegase, pandapower.networks.case1354pegase()",
                 "columns: from_bus to_bus r_ohm x_ohm (lines, then trafos)",
                 "parallel branches are listed; the loader keeps the first",
                 f"buses {len(net.bus)} branches {len(rows)}"],
                rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--football-gml", required=True)
    ap.add_argument("--skip-pegase", action="store_true")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export_karate(out)
    export_lesmis(out)
    export_football(out, args.football_gml)
    if not args.skip_pegase:
        export_pegase(out)
    for p in sorted(out.iterdir()):
        print(hashlib.sha256(p.read_bytes()).hexdigest(), p.name)


if __name__ == "__main__":
    main()
