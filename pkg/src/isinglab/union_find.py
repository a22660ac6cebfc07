"""Union-find with path compression, for cluster counting."""


class UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))
        self.n_components = size

    def find(self, a):
        p = a
        while self.parent[p] != p:
            p = self.parent[p]
        while self.parent[a] != p:
            self.parent[a], a = p, self.parent[a]
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.n_components -= 1

    def connected(self, a, b):
        return self.find(a) == self.find(b)
