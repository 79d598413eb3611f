class UnionFind:
    """Disjoint sets over hashable items with path halving and union by size.

    >>> uf = UnionFind("abc")
    >>> uf.union("a", "b")
    True
    >>> uf.count
    2
    """

    def __init__(self, items=()):
        self.parent = {}
        self.size = {}
        self.count = 0
        for x in items:
            self.add(x)

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1
            self.count += 1

    def __contains__(self, x):
        return x in self.parent

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x, y):
        """Merge the sets of x and y. Returns False if they were already joined."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]
        self.count -= 1
        return True

    def component_sizes(self):
        return sorted((self.size[r] for r in self.parent if self.parent[r] == r), reverse=True)
