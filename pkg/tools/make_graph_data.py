"""Regenerate ``src/bunkbed/data/connected_graphs_le7.g6`` from the networkx graph atlas.

The atlas lists every graph on at most seven vertices; connected ones are
kept, in atlas order (by vertex count, then edge count).
"""
from pathlib import Path

import networkx as nx

OUT = Path(__file__).resolve().parents[1] / "src" / "bunkbed" / "data" / "connected_graphs_le7.g6"


def main():
    lines = []
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() >= 1 and nx.is_connected(g):
            lines.append(nx.to_graph6_bytes(g, header=False).decode().strip())
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} graphs to {OUT}")


if __name__ == "__main__":
    main()
