"""Per-slot resource-block assignment."""

from __future__ import annotations


class SlotAssignment:
    """Which links transmit on which resource blocks during one slot.

    Kept as two mirrored indexes (link -> RBs and RB -> links) so both the
    scheduler and the SINR code can look things up in either direction.
    """

    def __init__(self, n_links: int, n_rbs: int):
        self.n_links = n_links
        self.n_rbs = n_rbs
        self.rb_links: list[set[int]] = [set() for _ in range(n_rbs)]
        self.link_rbs: list[set[int]] = [set() for _ in range(n_links)]

    def assign(self, link: int, rb: int) -> None:
        if not 0 <= rb < self.n_rbs:
            raise IndexError(f"rb {rb} out of range for {self.n_rbs} RBs")
        if not 0 <= link < self.n_links:
            raise IndexError(f"link {link} out of range")
        self.rb_links[rb].add(link)
        self.link_rbs[link].add(rb)

    def is_active(self, link: int, rb: int) -> bool:
        return link in self.rb_links[rb]

    def rbs_of(self, link: int) -> list[int]:
        return sorted(self.link_rbs[link])

    def links_on(self, rb: int) -> list[int]:
        return sorted(self.rb_links[rb])

    def active_links(self) -> list[int]:
        return [i for i, rbs in enumerate(self.link_rbs) if rbs]

    @property
    def n_assigned(self) -> int:
        return sum(len(s) for s in self.rb_links)

    def violations(self, graph) -> list[tuple[int, int, int]]:
        """All ``(rb, i, j)`` with conflicting links ``i < j`` sharing ``rb``."""
        out = []
        for rb, links in enumerate(self.rb_links):
            ls = sorted(links)
            for a, i in enumerate(ls):
                for j in ls[a + 1 :]:
                    if graph.conflicts(i, j):
                        out.append((rb, i, j))
        return out

    def is_feasible(self, graph) -> bool:
        return not self.violations(graph)

    def to_trace(self, slot: int) -> dict:
        return {"slot": slot, "rb": [self.links_on(rb) for rb in range(self.n_rbs)]}

    @classmethod
    def from_rb_lists(cls, n_links: int, rb_lists) -> SlotAssignment:
        a = cls(n_links, len(rb_lists))
        for rb, links in enumerate(rb_lists):
            for i in links:
                a.assign(i, rb)
        return a

    def __eq__(self, other):
        if not isinstance(other, SlotAssignment):
            return NotImplemented
        return self.n_links == other.n_links and self.rb_links == other.rb_links

    def __repr__(self):
        return f"SlotAssignment({[self.links_on(rb) for rb in range(self.n_rbs)]})"
