"""Equal-mass hard-disk simulation in a rectangular box with elastic collisions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericsError

__all__ = ["Particle", "SimConfig", "init_state", "resolve_pair_collision", "step", "run"]


@dataclass
class Particle:
    """A hard disk: position and velocity in the plane, radius, mass."""

    position: np.ndarray
    velocity: np.ndarray
    radius: float = 0.03
    mass: float = 1.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(2).copy()
        self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(2).copy()
        if self.radius <= 0 or self.mass <= 0:
            raise ConfigurationError("radius and mass must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings: box geometry, particle count, timestep, seed."""

    n_particles: int = 5
    box_width: float = 1.0
    box_height: float = 1.0
    radius: float = 0.03
    speed_scale: float = 1.0
    dt: float = 0.005
    n_steps: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n_particles < 1:
            raise ConfigurationError(f"n_particles must be >= 1, got {self.n_particles}")
        if self.box_width <= 0 or self.box_height <= 0:
            raise ConfigurationError("box dimensions must be positive")
        if self.radius <= 0 or min(self.box_width, self.box_height) <= 4 * self.radius:
            raise ConfigurationError(
                f"box dimensions must exceed 4 x radius; radius {self.radius} "
                f"does not fit the box {self.box_width} x {self.box_height}"
            )
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ConfigurationError(f"n_steps must be >= 1, got {self.n_steps}")


def init_state(config: SimConfig) -> list[Particle]:
    """Draw a seeded non-overlapping initial state.

    Positions are sampled uniformly inside the box (keeping each disk fully
    inside the walls) and re-drawn until no pair overlaps; velocities are
    uniform in ``[-speed_scale, speed_scale]`` per component.
    """
    rng = np.random.default_rng(config.seed)
    r = config.radius
    lo = np.array([r, r])
    hi = np.array([config.box_width - r, config.box_height - r])
    positions: list[np.ndarray] = []
    max_tries = 10_000 * config.n_particles
    tries = 0
    while len(positions) < config.n_particles:
        tries += 1
        if tries > max_tries:
            raise ConfigurationError(
                f"could not place {config.n_particles} disks of radius {r} in a "
                f"{config.box_width} x {config.box_height} box after {max_tries} draws"
            )
        cand = rng.uniform(lo, hi)
        if all(np.linalg.norm(cand - p) > 2 * r for p in positions):
            positions.append(cand)
    velocities = rng.uniform(-config.speed_scale, config.speed_scale, size=(config.n_particles, 2))
    return [Particle(p, v, radius=r) for p, v in zip(positions, velocities)]


def resolve_pair_collision(p1: Particle, p2: Particle) -> tuple[Particle, Particle]:
    """Exchange equal-mass velocity components along the line of centers.

    For equal masses the elastic impulse swaps the normal components and
    leaves the tangential components untouched:
    ``v1' = v1 + ((v2 - v1) . n) n`` and ``v2' = v2 - ((v2 - v1) . n) n``
    with ``n`` the unit vector from ``p1`` to ``p2``.  Momentum and kinetic
    energy are conserved to rounding.  Velocities update in place; the pair
    is returned for convenience.
    """
    delta = p2.position - p1.position
    dist = float(np.linalg.norm(delta))
    if dist < 1e-12:
        raise NumericsError("coincident particle centers: collision normal undefined")
    n = delta / dist
    exchange = float(np.dot(p2.velocity - p1.velocity, n)) * n
    p1.velocity += exchange
    p2.velocity -= exchange
    return p1, p2


def _separate_pair(p1: Particle, p2: Particle, rng: np.random.Generator) -> None:
    """Push an overlapping pair apart symmetrically to exact contact distance."""
    delta = p2.position - p1.position
    dist = float(np.linalg.norm(delta))
    if dist < 1e-12:
        # Coincident centers: pick a random separation direction.
        angle = rng.uniform(0.0, 2.0 * np.pi)
        delta = np.array([np.cos(angle), np.sin(angle)])
        dist = 1.0
    n = delta / dist
    target = p1.radius + p2.radius
    shift = 0.5 * (target - dist)
    p1.position -= shift * n
    p2.position += shift * n


def step(particles: list[Particle], config: SimConfig, rng: np.random.Generator | None = None) -> None:
    """Advance the state by one timestep in place.

    Free flight first, then wall reflections (velocity component flipped and
    position clamped back inside), then pairwise collision resolution in
    ascending ``(i, j)`` order.  A pair only exchanges velocities when the
    disks overlap *and* are approaching, so a pair left barely overlapping
    after resolution cannot re-collide forever; overlapping disks are also
    pushed apart symmetrically to exact contact.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    box = np.array([config.box_width, config.box_height])

    def reflect_walls(p: Particle) -> None:
        for ax in range(2):
            if p.position[ax] < p.radius:
                p.velocity[ax] = abs(p.velocity[ax])
                p.position[ax] = p.radius
            elif p.position[ax] > box[ax] - p.radius:
                p.velocity[ax] = -abs(p.velocity[ax])
                p.position[ax] = box[ax] - p.radius

    for p in particles:
        p.position += p.velocity * config.dt
        reflect_walls(p)

    n = len(particles)
    collided = False
    for i in range(n):
        for j in range(i + 1, n):
            a, b = particles[i], particles[j]
            delta = b.position - a.position
            dist = float(np.linalg.norm(delta))
            if dist >= a.radius + b.radius:
                continue
            collided = True
            approaching = float(np.dot(b.velocity - a.velocity, delta)) < 0.0
            if approaching:
                resolve_pair_collision(a, b)
            _separate_pair(a, b, rng)
    if collided:
        # Pair separation may have pushed a disk past a wall; restore containment.
        for p in particles:
            reflect_walls(p)


def run(config: SimConfig) -> np.ndarray:
    """Simulate and return the trajectory matrix.

    Returns
    -------
    (n_steps, 2 * n_particles) array: row 0 is the initial state, each
    subsequent row one timestep later; columns are ``x_1, y_1, x_2, y_2, ...``.
    """
    particles = init_state(config)
    rng = np.random.default_rng((config.seed, 1))
    out = np.empty((config.n_steps, 2 * config.n_particles), dtype=np.float64)
    out[0] = np.concatenate([p.position for p in particles])
    for t in range(1, config.n_steps):
        step(particles, config, rng)
        out[t] = np.concatenate([p.position for p in particles])
    return out
