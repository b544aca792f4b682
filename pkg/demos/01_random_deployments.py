"""Random sensor-network deployments.

Walks through generating a random directed deployment, inspecting its
incoming/outgoing edge structure, checking that every node can reach
the gateway, and round-tripping the graph through its text format.
"""

import tempfile

from qncsim import DeploymentConfig, generate_deployment, load_graph, save_graph

print("=== a small random deployment ===")
cfg = DeploymentConfig(node_count=10, edge_count=30, seed=42)
graph = generate_deployment(cfg)
print(f"nodes: {graph.node_count}, edges: {graph.edge_count}, gateway: {graph.gateway}")
print(f"every node reaches the gateway: {graph.all_reach_gateway()}")

print("\nper-node degrees (in / out):")
for v in range(graph.node_count):
    marker = "  <- gateway" if v == graph.gateway else ""
    print(f"  node {v}: {len(graph.incoming_edges(v))} in, "
          f"{len(graph.outgoing_edges(v))} out{marker}")

print("\nfirst five edges (id tail head capacity):")
for edge in graph.edges[:5]:
    print(f"  {edge.id} {edge.tail} {edge.head} {edge.capacity_bits}")

print("\n=== determinism and the text format ===")
again = generate_deployment(cfg)
print(f"same seed reproduces the same graph: {graph == again}")

with tempfile.NamedTemporaryFile(mode="w", suffix=".txt", delete=False) as handle:
    path = handle.name
save_graph(graph, path)
back = load_graph(path)
print(f"text round trip is lossless: {back == graph}")
with open(path) as handle:
    print("file header:", handle.readline().strip())

print("\n=== per-edge capacities ===")
varied = generate_deployment(DeploymentConfig(
    node_count=6, edge_count=15, capacity=lambda rng, k: rng.uniform(1.0, 4.0, k),
    seed=7,
))
print("sampled capacities:", [round(float(c), 2) for c in varied.capacities()[:6]], "...")
