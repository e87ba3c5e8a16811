"""Shared synthetic fixtures for the application-level tests."""

import numpy as np

#: Which parent each of the seven child classes belongs to.
CHILD_PARENT = (0, 0, 0, 1, 1, 2, 2)


def nested_hierarchy(seed, d=8, parent_sep=10.0, sigma=2.0, m_parent=800,
                     m_child=300, child_offset=2.5):
    """Three broad parent clouds; children share the parent spread but sit at
    an offset location inside it, so mixing a child into its own parent only
    adds a small between-means spread (ratio barely above 1) while a wrong
    parent gains a far-away clump (ratio clearly above 1).
    """
    rng = np.random.default_rng(seed)
    centers = []
    for i in range(3):
        c = np.zeros(d)
        c[i] = parent_sep
        centers.append(c)
    parents = {
        p: rng.normal(loc=centers[p], scale=sigma, size=(m_parent, d)).T
        for p in range(3)
    }
    children = {}
    for cid, p in enumerate(CHILD_PARENT):
        direction = rng.normal(size=d)
        direction *= child_offset / np.linalg.norm(direction)
        children[cid] = rng.normal(
            loc=centers[p] + direction, scale=sigma, size=(m_child, d)
        ).T
    return children, parents


def saturating_class(seed, d=16, count=4096):
    """i.i.d. standard Gaussian class used for the saturation-curve checks."""
    rng = np.random.default_rng(seed)
    return rng.normal(size=(d, count))
