"""Binary-collision Monte Carlo transport of ions and their recoils.

Ions are processed in fixed chunks of `IONS_PER_CHUNK`. Inside a chunk every
live particle (primary or recoil) advances one flight-plus-collision step per
iteration, so the physics runs on numpy arrays instead of Python recursion.
Random numbers come from `transport.rng`, keyed by (seed, ion index, particle
id, collision counter, slot), which makes each cascade independent of the
chunk it shares and of the worker that runs it.
"""

import math
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from materials.model import IonBeam, TargetMaterial, atomic_density
from runtime.config import logger, BACKEND
from runtime.errors import ConfigurationError, PhysicsError
from transport.records import CascadeRecord, DamageMode, ImplantationResult, Terminal
from transport.rng import RngStream, child_id, counter_uniform
from transport.scattering import E2_EV_NM, scattering_angle_magic, screening_length
from transport.stopping import (
    LS_VALIDITY_KEV,
    nrt_displacements,
    robinson_damage_energy,
    stopping_coefficient,
)

IONS_PER_CHUNK = 128
LOW_ENERGY_CUTOFF_EV = 5.0
MAX_STEPS = 200_000

SLOT_FLIGHT = 0
SLOT_IMPACT = 1
SLOT_AZIMUTH = 2
SLOT_SPECIES = 3

_TERMINAL_CODES = (Terminal.STOPPED, Terminal.BACKSCATTERED, Terminal.TRANSMITTED)


@dataclass(frozen=True)
class TransportSetup:
    beam: IonBeam
    target: TargetMaterial
    slab_thickness: float  # nm
    mode: DamageMode
    seed: int
    use_robinson: bool = True

    def __post_init__(self) -> None:
        if not self.slab_thickness > 0:
            raise ConfigurationError(f"slab thickness must be > 0 nm, got {self.slab_thickness}")


class CollisionTables:
    """Per (moving species, target element) constants for one setup.

    Species 0 is the beam ion, species 1 + j is a recoil of target element j.
    """

    def __init__(self, setup: TransportSetup) -> None:
        target = setup.target
        moving = [setup.beam.ion] + [el for el, _ in target.elements]
        struck = [el for el, _ in target.elements]

        density_nm3 = atomic_density(target) * 1e-21
        self.free_path = density_nm3 ** (-1.0 / 3.0)
        self.p_max = 1.0 / math.sqrt(math.pi * density_nm3 ** (2.0 / 3.0))
        self.cutoff = min(target.surface_binding_energy, LOW_ENERGY_CUTOFF_EV)
        self.lattice_binding = target.lattice_binding_energy
        self.thickness = setup.slab_thickness

        self.cum_fraction = np.cumsum([f for _, f in target.elements])
        self.ed = np.array(target.displacement_energy, dtype=float)
        self.z_moving = np.array([el.atomic_number for el in moving])
        self.z_struck = np.array([el.atomic_number for el in struck])
        self.stopping = np.array([stopping_coefficient(el, target) for el in moving])

        shape = (len(moving), len(struck))
        self.screening = np.empty(shape)
        self.eps_per_ev = np.empty(shape)
        self.gamma = np.empty(shape)
        self.mass_ratio = np.empty(shape)
        for s, m in enumerate(moving):
            for j, t in enumerate(struck):
                a = screening_length(m.atomic_number, t.atomic_number)
                self.screening[s, j] = a
                self.eps_per_ev[s, j] = a * t.mass / ((m.mass + t.mass) * m.atomic_number * t.atomic_number * E2_EV_NM)
                self.gamma[s, j] = 4.0 * m.mass * t.mass / (m.mass + t.mass) ** 2
                self.mass_ratio[s, j] = m.mass / t.mass
        self.struck_elements = struck


class _Particles:
    """Structure-of-arrays state of the live particles of one chunk."""

    FIELDS = ("local", "key", "pid", "species", "energy", "z", "cx", "cy", "cz", "counter", "primary")

    def __init__(self, **arrays: np.ndarray) -> None:
        for name in self.FIELDS:
            setattr(self, name, arrays[name])

    @property
    def size(self) -> int:
        return self.energy.size

    def keep(self, mask: np.ndarray) -> None:
        for name in self.FIELDS:
            setattr(self, name, getattr(self, name)[mask])

    def extend(self, other: "_Particles") -> None:
        for name in self.FIELDS:
            setattr(self, name, np.concatenate([getattr(self, name), getattr(other, name)]))


def _rotate(cx: np.ndarray, cy: np.ndarray, cz: np.ndarray, polar: np.ndarray, azimuth: np.ndarray):
    """Turn unit vectors by `polar` around themselves at `azimuth`."""
    cos_p, sin_p = np.cos(polar), np.sin(polar)
    cos_a, sin_a = np.cos(azimuth), np.sin(azimuth)
    s = np.sqrt(np.maximum(1.0 - cz * cz, 0.0))
    along_axis = s < 1e-10
    safe_s = np.where(along_axis, 1.0, s)
    nx = cx * cos_p + sin_p * (cx * cz * cos_a - cy * sin_a) / safe_s
    ny = cy * cos_p + sin_p * (cy * cz * cos_a + cx * sin_a) / safe_s
    nz = cz * cos_p - s * sin_p * cos_a
    sign = np.where(cz < 0, -1.0, 1.0)
    nx = np.where(along_axis, sin_p * cos_a, nx)
    ny = np.where(along_axis, sin_p * sin_a, ny)
    nz = np.where(along_axis, sign * cos_p, nz)
    norm = np.sqrt(nx * nx + ny * ny + nz * nz)
    return nx / norm, ny / norm, nz / norm


def _damage_energy(setup: TransportSetup, tables: CollisionTables, element: np.ndarray,
                   transferred: np.ndarray) -> np.ndarray:
    if not setup.use_robinson:
        return transferred
    tdam = np.empty_like(transferred)
    for j, el in enumerate(tables.struck_elements):
        sel = element == j
        if sel.any():
            tdam[sel] = robinson_damage_energy(el, setup.target, transferred[sel])
    return tdam


def _transport_chunk(setup: TransportSetup, ion_indices: Sequence[int]) -> List[CascadeRecord]:
    tables = CollisionTables(setup)
    full_cascade = setup.mode is DamageMode.FULL_CASCADE
    n = len(ion_indices)
    ion_index = np.asarray(ion_indices, dtype=np.int64)
    e0 = setup.beam.energy_ev
    tilt = math.radians(setup.beam.tilt_angle)

    p = _Particles(
        local=np.arange(n),
        key=ion_index.copy(),
        pid=ion_index.view(np.uint64).copy(),
        species=np.zeros(n, dtype=np.int64),
        energy=np.full(n, e0),
        z=np.zeros(n),
        cx=np.full(n, math.sin(tilt)),
        cy=np.zeros(n),
        cz=np.full(n, math.cos(tilt)),
        counter=np.zeros(n, dtype=np.int64),
        primary=np.ones(n, dtype=bool),
    )

    e_elec = np.zeros(n)
    e_phonon = np.zeros(n)
    e_exit = np.zeros(n)
    terminal = np.zeros(n, dtype=np.int8)
    final_depth = np.full(n, np.nan)
    vac_local: List[np.ndarray] = []
    vac_depth: List[np.ndarray] = []
    vac_energy: List[np.ndarray] = []
    vac_weight: List[np.ndarray] = []

    def deposit(target_sum: np.ndarray, mask: np.ndarray, values: np.ndarray) -> None:
        if mask.any():
            target_sum += np.bincount(p.local[mask], weights=values[mask], minlength=n)

    def stop_in_place(mask: np.ndarray) -> None:
        if not mask.any():
            return
        deposit(e_phonon, mask, p.energy)
        stopped_primary = mask & p.primary
        final_depth[p.local[stopped_primary]] = p.z[stopped_primary]
        p.keep(~mask)

    steps = 0
    while p.size:
        steps += 1
        if steps > MAX_STEPS:
            raise PhysicsError(f"cascade did not terminate after {MAX_STEPS} steps (ions {ion_index[0]}..{ion_index[-1]})")

        stop_in_place(p.energy < tables.cutoff)
        if not p.size:
            break

        u_flight = counter_uniform(setup.seed, p.key, p.pid, p.counter, SLOT_FLIGHT)
        flight = np.where(p.primary & (p.counter == 0), tables.free_path * u_flight, tables.free_path)
        p.z = p.z + flight * p.cz
        loss = np.minimum(tables.stopping[p.species] * np.sqrt(p.energy * 1e-3) * flight, p.energy)
        deposit(e_elec, np.ones(p.size, dtype=bool), loss)
        p.energy = p.energy - loss

        backscattered = p.z < 0.0
        transmitted = p.z > tables.thickness
        exiting = backscattered | transmitted
        if exiting.any():
            deposit(e_exit, exiting, p.energy)
            terminal[p.local[backscattered & p.primary]] = 1
            terminal[p.local[transmitted & p.primary]] = 2
            p.keep(~exiting)
            if not p.size:
                break

        stop_in_place(p.energy < tables.cutoff)
        if not p.size:
            break

        u_impact = counter_uniform(setup.seed, p.key, p.pid, p.counter, SLOT_IMPACT)
        u_azimuth = counter_uniform(setup.seed, p.key, p.pid, p.counter, SLOT_AZIMUTH)
        u_species = counter_uniform(setup.seed, p.key, p.pid, p.counter, SLOT_SPECIES)

        element = np.minimum(np.searchsorted(tables.cum_fraction, u_species, side="right"),
                             len(tables.cum_fraction) - 1)
        epsilon = tables.eps_per_ev[p.species, element] * p.energy
        b = tables.p_max * np.sqrt(u_impact) / tables.screening[p.species, element]
        theta = np.atleast_1d(scattering_angle_magic(epsilon, b))
        transferred = np.minimum(tables.gamma[p.species, element] * p.energy * np.sin(0.5 * theta) ** 2, p.energy)
        remaining = p.energy - transferred
        azimuth = 2.0 * np.pi * u_azimuth
        psi = np.arctan2(np.sin(theta), np.cos(theta) + tables.mass_ratio[p.species, element])
        ed = tables.ed[element]
        displaced = transferred > ed

        if full_cascade:
            replaced = displaced & (remaining < ed) & (tables.z_moving[p.species] == tables.z_struck[element])
            vacancy = displaced & ~replaced
            recoil_energy = np.maximum(transferred - tables.lattice_binding, 0.0)
            deposit(e_phonon, displaced, transferred - recoil_energy)
            deposit(e_phonon, ~displaced, transferred)
            deposit(e_phonon, replaced, remaining)
            weight = np.ones(int(vacancy.sum()))
        else:
            replaced = np.zeros_like(displaced)
            tdam = np.zeros_like(transferred)
            if displaced.any():
                tdam[displaced] = _damage_energy(setup, tables, element[displaced], transferred[displaced])
            nu = np.where(displaced, nrt_displacements(tdam, ed), 0.0)
            vacancy = nu > 0
            deposit(e_elec, displaced, transferred - tdam)
            deposit(e_phonon, displaced, tdam)
            deposit(e_phonon, ~displaced, transferred)
            weight = nu[vacancy]

        if vacancy.any():
            vac_local.append(p.local[vacancy])
            vac_depth.append(p.z[vacancy])
            vac_energy.append(transferred[vacancy])
            vac_weight.append(weight)

        recoils: Optional[_Particles] = None
        if full_cascade and displaced.any():
            d = displaced
            rx, ry, rz = _rotate(p.cx[d], p.cy[d], p.cz[d], 0.5 * (np.pi - theta[d]), azimuth[d] + np.pi)
            recoils = _Particles(
                local=p.local[d],
                key=p.key[d],
                pid=child_id(p.pid[d], p.counter[d]),
                species=1 + element[d],
                energy=recoil_energy[d],
                z=p.z[d],
                cx=rx,
                cy=ry,
                cz=rz,
                counter=np.zeros(int(d.sum()), dtype=np.int64),
                primary=np.zeros(int(d.sum()), dtype=bool),
            )

        p.cx, p.cy, p.cz = _rotate(p.cx, p.cy, p.cz, psi, azimuth)
        p.energy = remaining
        p.counter = p.counter + 1
        if not np.all(np.isfinite(p.energy)):
            raise PhysicsError(f"non-finite particle energy at step {steps} (ions {ion_index[0]}..{ion_index[-1]})")

        if replaced.any():
            replaced_primary = replaced & p.primary
            final_depth[p.local[replaced_primary]] = p.z[replaced_primary]
            p.keep(~replaced)
        if recoils is not None:
            p.extend(recoils)

    if vac_local:
        all_local = np.concatenate(vac_local)
        order = np.argsort(all_local, kind="stable")
        all_local = all_local[order]
        all_depth = np.concatenate(vac_depth)[order]
        all_energy = np.concatenate(vac_energy)[order]
        all_weight = np.concatenate(vac_weight)[order]
        bounds = np.searchsorted(all_local, np.arange(n + 1))
    else:
        all_depth = all_energy = all_weight = np.zeros(0)
        bounds = np.zeros(n + 1, dtype=np.int64)

    records = []
    for i in range(n):
        lo, hi = bounds[i], bounds[i + 1]
        code = _TERMINAL_CODES[terminal[i]]
        records.append(CascadeRecord(
            ion_index=int(ion_index[i]),
            terminal=code,
            final_depth=float(final_depth[i]) if code is Terminal.STOPPED else None,
            initial_energy=e0,
            energy_to_electrons=float(e_elec[i]),
            energy_to_phonons=float(e_phonon[i]),
            energy_exited=float(e_exit[i]),
            vacancy_depth=all_depth[lo:hi].copy(),
            vacancy_energy=all_energy[lo:hi].copy(),
            vacancy_weight=all_weight[lo:hi].copy(),
        ))
    return records


def transport_ion(beam: IonBeam, target: TargetMaterial, slab_thickness: float, mode: "str | DamageMode",
                  rng: RngStream, use_robinson: bool = True) -> CascadeRecord:
    """Transport a single ion; `rng.stream_key` is its ion index."""
    setup = TransportSetup(beam, target, float(slab_thickness), DamageMode.parse(mode), int(rng.seed), use_robinson)
    return _transport_chunk(setup, [rng.stream_key])[0]


def chunk_ranges(n_ions: int, chunk_size: int = IONS_PER_CHUNK) -> List[range]:
    return [range(start, min(start + chunk_size, n_ions)) for start in range(0, n_ions, chunk_size)]


def run_implantation(beam: IonBeam, target: TargetMaterial, slab_thickness: float, n_ions: int,
                     mode: "str | DamageMode" = DamageMode.FULL_CASCADE, seed: int = 0, workers: int = 1,
                     backend: Optional[str] = None, use_robinson: bool = True) -> ImplantationResult:
    """Run `n_ions` independent cascades and merge them in ion order.

    Args:
        beam: Ion species, energy and tilt.
        target: Target material.
        slab_thickness: Slab thickness in nm; particles leaving it are counted, not tracked.
        n_ions: Number of primary ions (>= 1).
        mode: "full-cascade" or "kinchin-pease" (aliases "cascade", "kp").
        seed: Master seed.
        workers: joblib worker count. Results do not depend on it.
        backend: joblib backend, defaults to NVFORGE_BACKEND.
        use_robinson: Remove recoil electronic losses before the NRT estimate.

    Returns:
        ImplantationResult with one CascadeRecord per ion, sorted by ion index.
    """
    if n_ions < 1:
        raise ConfigurationError(f"n_ions must be >= 1, got {n_ions}")
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    setup = TransportSetup(beam, target, float(slab_thickness), DamageMode.parse(mode), int(seed), use_robinson)
    if beam.energy > LS_VALIDITY_KEV:
        logger.warning(f"⚠️ {beam.energy} keV is above the {LS_VALIDITY_KEV} keV stopping validity ceiling")

    chunks = chunk_ranges(n_ions)
    logger.info(f"Implanting {n_ions} {beam.ion.symbol} ions at {beam.energy} keV "
                f"({setup.mode.value}, {len(chunks)} chunks, workers={workers})")
    start = time.time()
    batches = Parallel(n_jobs=workers, backend=backend or BACKEND)(
        delayed(_transport_chunk)(setup, list(chunk)) for chunk in chunks
    )
    records = sorted((r for batch in batches for r in batch), key=lambda r: r.ion_index)
    result = ImplantationResult(beam=beam, target=target, slab_thickness=setup.slab_thickness, mode=setup.mode,
                                seed=setup.seed, records=records)
    logger.info(f"✅ Implantation finished in {time.time() - start:.1f}s "
                f"(backscattered={result.backscattered}, transmitted={result.transmitted})")
    return result

