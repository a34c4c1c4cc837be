import random


def find_bridges(n, edges):
    """Bridge edges of an undirected graph, as sorted [u, v] pairs (u < v).

    Iterative low-link traversal; parallel edges are treated as one edge."""
    adjacency = [[] for _ in range(n)]
    for index, (u, v) in enumerate(edges):
        adjacency[u].append((v, index))
        adjacency[v].append((u, index))
    disc = [-1] * n
    low = [0] * n
    bridges = []
    counter = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        stack = [(root, -1, iter(adjacency[root]))]
        disc[root] = low[root] = counter
        counter += 1
        while stack:
            node, parent_edge, neighbors = stack[-1]
            advanced = False
            for neighbor, edge_index in neighbors:
                if edge_index == parent_edge:
                    continue
                if disc[neighbor] == -1:
                    disc[neighbor] = low[neighbor] = counter
                    counter += 1
                    stack.append((neighbor, edge_index, iter(adjacency[neighbor])))
                    advanced = True
                    break
                low[node] = min(low[node], disc[neighbor])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[node])
                if low[node] > disc[parent]:
                    u, v = sorted((parent, node))
                    bridges.append([u, v])
    bridges.sort()
    return bridges


class Bridge(VerifiableTask):
    prompt_template = ("An undirected graph has {n} vertices labeled 0 to "
                       "{top}. Its edges are listed as endpoint pairs: {edges} "
                       "Output every bridge edge as two endpoints u v with "
                       "u < v, listing bridges in ascending order, all numbers "
                       "separated by single spaces.")
    parameter = {"vertices": "5 + 2*difficulty", "components": "1 + (difficulty + 1) // 2",
                 "extra_edge_rate": 0.35}

    def generate(self, seed, difficulty):
        rng = random.Random(f"bridge:{seed}:{difficulty}")
        core = 4 + 2 * difficulty
        chunks = 1 + (difficulty + 1) // 2
        bounds = [round(i * core / chunks) for i in range(chunks + 1)]
        edge_set = set()
        for c in range(chunks):
            members = list(range(bounds[c], bounds[c + 1]))
            for offset in range(1, len(members)):
                other = members[rng.randrange(offset)]
                edge_set.add(tuple(sorted((members[offset], other))))
            for a in members:
                for b in members:
                    if a < b and rng.random() < 0.35:
                        edge_set.add((a, b))
        for c in range(chunks - 1):
            left = rng.randrange(bounds[c], bounds[c + 1])
            right = rng.randrange(bounds[c + 1], bounds[c + 2])
            edge_set.add(tuple(sorted((left, right))))
        # Pendant vertex with the highest label guarantees >= 1 bridge.
        edge_set.add((rng.randrange(core), core))
        n = core + 1
        edges = sorted([list(e) for e in edge_set])
        latent = {"n": n, "edges": edges}
        return latent, find_bridges(n, [tuple(e) for e in edges])

    def render(self, latent):
        text = " ".join(f"{u} {v}" for u, v in latent["edges"])
        return self.prompt_template.format(n=latent["n"], top=latent["n"] - 1,
                                           edges=text)

    def process(self, response):
        return parse_int_list(response) if response.split() else []

    def score(self, parsed, latent, answer):
        if parsed is None or len(parsed) % 2 != 0:
            return 0.0
        n = latent["n"]
        edge_set = {tuple(e) for e in latent["edges"]}
        found = set()
        for i in range(0, len(parsed), 2):
            u, v = parsed[i], parsed[i + 1]
            if u == v or not (0 <= u < n) or not (0 <= v < n):
                return 0.0
            pair = (min(u, v), max(u, v))
            if pair not in edge_set or pair in found:
                return 0.0
            found.add(pair)
        true_set = {tuple(e) for e in answer}
        if not found and not true_set:
            return 1.0
        union = found | true_set
        return len(found & true_set) / len(union) if union else 1.0

    def render_answer(self, reference):
        return " ".join(f"{u} {v}" for u, v in reference)
