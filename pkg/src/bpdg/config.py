"""Plain-text sectioned key=value configuration.

The format is deliberately minimal: INI sections matching the solver
blocks, every key explicitly whitelisted, and all validation problems
reported in a single pass.  serialize_config(parse_config(path)) is
idempotent, and the canonical serialization is what gets hashed into
snapshot headers for replay identification.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from importlib import resources
from dataclasses import dataclass, field

from .errors import ConfigError

_BAND_KINDS = ("parabolic", "kane")
_BC_KINDS = ("periodic", "dirichlet")
_DOPING_KINDS = ("uniform", "nplus-n-nplus")
_RK_CHOICES = ("auto", "1", "2", "3")
_REFRESH_CHOICES = ("per-stage", "frozen")
_INITIAL_KINDS = ("maxwellian", "doping-maxwellian")


@dataclass
class MeshBlock:
    N_x: int = 16
    N_p: int = 16
    N_mu: int = 8
    L: float = 1.0
    p_max: float = 4.0


@dataclass
class BandBlock:
    kind: str = "parabolic"
    m_star: float = 1.0
    alpha_k: float = 0.0


@dataclass
class ScatteringBlock:
    K: float = 0.0
    hbar_omega: float = 0.0
    n_ph: object = 0.0  # float or "thermal"
    c0: float = 0.0


@dataclass
class PoissonBlock:
    bc: str = "periodic"
    Phi0: float = 0.0
    q: float = 1.0
    epsilon_perm: float = 1.0
    doping: str = "uniform"
    N0: float = 1.0
    n_plus: float = 1.0
    n: float = 0.25
    junctions: tuple = (0.25, 0.75)


@dataclass
class NumericsBlock:
    degree: int = 1
    rk: str = "auto"  # "auto" | "1" | "2" | "3"
    cfl_safety: float = 0.9
    limiter: bool = True
    alpha: object = "auto"  # "auto" or float in (0, 1)
    poisson_refresh: str = "per-stage"


@dataclass
class RunBlock:
    t_final: float = 1.0
    max_steps: int = 1000
    snapshot_every: int = 0
    output_dir: str = "out"
    seed: int = 0


@dataclass
class InitialBlock:
    kind: str = "maxwellian"
    x_amplitude: float = 0.0
    mu_amplitude: float = 0.0


@dataclass
class SimulationConfig:
    mesh: MeshBlock = field(default_factory=MeshBlock)
    band: BandBlock = field(default_factory=BandBlock)
    scattering: ScatteringBlock = field(default_factory=ScatteringBlock)
    poisson: PoissonBlock = field(default_factory=PoissonBlock)
    numerics: NumericsBlock = field(default_factory=NumericsBlock)
    run: RunBlock = field(default_factory=RunBlock)
    initial: InitialBlock = field(default_factory=InitialBlock)

    def rk_name(self):
        """Integrator name with the degree-matched automatic choice."""
        choice = self.numerics.rk
        if choice == "auto":
            choice = "2" if self.numerics.degree == 1 else "3"
        return {"1": "euler", "2": "ssp2", "3": "ssp3"}[str(choice)]


_SCHEMA = {
    "mesh": ("N_x", "N_p", "N_mu", "L", "p_max"),
    "band": ("kind", "m_star", "alpha_k"),
    "scattering": ("K", "hbar_omega", "n_ph", "c0"),
    "poisson": ("bc", "Phi0", "q", "epsilon_perm", "doping", "N0",
                "n_plus", "n", "junctions"),
    "numerics": ("degree", "rk", "cfl_safety", "limiter", "alpha",
                 "poisson_refresh"),
    "run": ("t_final", "max_steps", "snapshot_every", "output_dir", "seed"),
    "initial": ("kind", "x_amplitude", "mu_amplitude"),
}


class _Collector:
    """Accumulates parse problems so they all surface at once."""

    def __init__(self):
        self.problems = []

    def add(self, msg):
        self.problems.append(msg)

    def get_int(self, parser, section, key, current):
        if not parser.has_option(section, key):
            return current
        raw = parser.get(section, key)
        try:
            return int(raw)
        except ValueError:
            self.add(f"[{section}] {key} = {raw!r}: expected an integer")
            return current

    def get_float(self, parser, section, key, current):
        if not parser.has_option(section, key):
            return current
        raw = parser.get(section, key)
        try:
            return float(raw)
        except ValueError:
            self.add(f"[{section}] {key} = {raw!r}: expected a number")
            return current

    def get_bool(self, parser, section, key, current):
        if not parser.has_option(section, key):
            return current
        raw = parser.get(section, key).strip().lower()
        if raw in ("on", "true", "yes", "1"):
            return True
        if raw in ("off", "false", "no", "0"):
            return False
        self.add(f"[{section}] {key} = {raw!r}: expected on/off")
        return current

    def get_str(self, parser, section, key, current, choices=None):
        if not parser.has_option(section, key):
            return current
        raw = parser.get(section, key).strip()
        if choices is not None and raw not in choices:
            self.add(f"[{section}] {key} = {raw!r}: expected one of {choices}")
            return current
        return raw


def parse_config_text(text) -> SimulationConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    col = _Collector()
    for section in parser.sections():
        if section not in _SCHEMA:
            col.add(f"unknown section [{section}]")
            continue
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                col.add(f"unknown key {key!r} in section [{section}]")

    cfg = SimulationConfig()

    m = cfg.mesh
    m.N_x = col.get_int(parser, "mesh", "N_x", m.N_x)
    m.N_p = col.get_int(parser, "mesh", "N_p", m.N_p)
    m.N_mu = col.get_int(parser, "mesh", "N_mu", m.N_mu)
    m.L = col.get_float(parser, "mesh", "L", m.L)
    m.p_max = col.get_float(parser, "mesh", "p_max", m.p_max)
    for name in ("N_x", "N_p", "N_mu"):
        if getattr(m, name) <= 0:
            col.add(f"[mesh] {name} must be positive")
    for name in ("L", "p_max"):
        if getattr(m, name) <= 0:
            col.add(f"[mesh] {name} must be positive")

    b = cfg.band
    b.kind = col.get_str(parser, "band", "kind", b.kind, _BAND_KINDS)
    b.m_star = col.get_float(parser, "band", "m_star", b.m_star)
    b.alpha_k = col.get_float(parser, "band", "alpha_k", b.alpha_k)
    if b.m_star <= 0:
        col.add("[band] m_star must be positive")
    if b.kind == "parabolic" and b.alpha_k != 0.0:
        col.add("[band] parabolic band requires alpha_k = 0")
    if b.kind == "kane" and b.alpha_k <= 0.0:
        col.add("[band] kane band requires alpha_k > 0")

    sc = cfg.scattering
    sc.K = col.get_float(parser, "scattering", "K", sc.K)
    sc.hbar_omega = col.get_float(parser, "scattering", "hbar_omega", sc.hbar_omega)
    if parser.has_option("scattering", "n_ph"):
        raw = parser.get("scattering", "n_ph").strip()
        if raw == "thermal":
            sc.n_ph = "thermal"
        else:
            try:
                sc.n_ph = float(raw)
            except ValueError:
                col.add(f"[scattering] n_ph = {raw!r}: expected a number or 'thermal'")
    sc.c0 = col.get_float(parser, "scattering", "c0", sc.c0)
    if sc.K < 0:
        col.add("[scattering] K must be nonnegative")
    if sc.hbar_omega < 0:
        col.add("[scattering] hbar_omega must be nonnegative")
    if sc.c0 < 0:
        col.add("[scattering] c0 must be nonnegative")
    if sc.n_ph == "thermal" and sc.hbar_omega <= 0 and sc.K > 0:
        col.add("[scattering] thermal n_ph requires hbar_omega > 0")
    if not isinstance(sc.n_ph, str) and sc.n_ph < 0:
        col.add("[scattering] n_ph must be nonnegative")

    po = cfg.poisson
    po.bc = col.get_str(parser, "poisson", "bc", po.bc, _BC_KINDS)
    po.Phi0 = col.get_float(parser, "poisson", "Phi0", po.Phi0)
    po.q = col.get_float(parser, "poisson", "q", po.q)
    po.epsilon_perm = col.get_float(parser, "poisson", "epsilon_perm", po.epsilon_perm)
    po.doping = col.get_str(parser, "poisson", "doping", po.doping, _DOPING_KINDS)
    po.N0 = col.get_float(parser, "poisson", "N0", po.N0)
    po.n_plus = col.get_float(parser, "poisson", "n_plus", po.n_plus)
    po.n = col.get_float(parser, "poisson", "n", po.n)
    if parser.has_option("poisson", "junctions"):
        raw = parser.get("poisson", "junctions").replace(",", " ").split()
        try:
            vals = tuple(float(v) for v in raw)
        except ValueError:
            vals = None
        if vals is None or len(vals) != 2:
            col.add("[poisson] junctions: expected two numbers")
        else:
            po.junctions = vals
    if po.q <= 0:
        col.add("[poisson] q must be positive")
    if po.epsilon_perm <= 0:
        col.add("[poisson] epsilon_perm must be positive")
    if po.doping == "nplus-n-nplus":
        if not 0.0 < po.junctions[0] < po.junctions[1] < cfg.mesh.L:
            col.add("[poisson] junctions must be strictly inside (0, L) and ordered")
        if po.n_plus <= 0 or po.n <= 0:
            col.add("[poisson] doping levels must be positive")
    elif po.N0 < 0:
        col.add("[poisson] N0 must be nonnegative")

    nu = cfg.numerics
    nu.degree = col.get_int(parser, "numerics", "degree", nu.degree)
    nu.rk = col.get_str(parser, "numerics", "rk", nu.rk, _RK_CHOICES)
    nu.cfl_safety = col.get_float(parser, "numerics", "cfl_safety", nu.cfl_safety)
    nu.limiter = col.get_bool(parser, "numerics", "limiter", nu.limiter)
    if parser.has_option("numerics", "alpha"):
        raw = parser.get("numerics", "alpha").strip()
        if raw == "auto":
            nu.alpha = "auto"
        else:
            try:
                nu.alpha = float(raw)
            except ValueError:
                col.add(f"[numerics] alpha = {raw!r}: expected 'auto' or a number")
    nu.poisson_refresh = col.get_str(parser, "numerics", "poisson_refresh",
                                     nu.poisson_refresh, _REFRESH_CHOICES)
    if nu.degree not in (1, 2):
        col.add("[numerics] degree must be 1 or 2")
    if not 0.0 < nu.cfl_safety <= 1.0:
        col.add("[numerics] cfl_safety must lie in (0, 1]")
    if not isinstance(nu.alpha, str) and not 0.0 < nu.alpha < 1.0:
        col.add("[numerics] alpha must lie strictly between 0 and 1")

    r = cfg.run
    r.t_final = col.get_float(parser, "run", "t_final", r.t_final)
    r.max_steps = col.get_int(parser, "run", "max_steps", r.max_steps)
    r.snapshot_every = col.get_int(parser, "run", "snapshot_every", r.snapshot_every)
    r.output_dir = col.get_str(parser, "run", "output_dir", r.output_dir)
    r.seed = col.get_int(parser, "run", "seed", r.seed)
    if r.t_final <= 0:
        col.add("[run] t_final must be positive")
    if r.max_steps <= 0:
        col.add("[run] max_steps must be positive")
    if r.snapshot_every < 0:
        col.add("[run] snapshot_every must be nonnegative")

    ini = cfg.initial
    ini.kind = col.get_str(parser, "initial", "kind", ini.kind, _INITIAL_KINDS)
    ini.x_amplitude = col.get_float(parser, "initial", "x_amplitude", ini.x_amplitude)
    ini.mu_amplitude = col.get_float(parser, "initial", "mu_amplitude", ini.mu_amplitude)
    if not -1.0 < ini.x_amplitude < 1.0:
        col.add("[initial] x_amplitude must lie in (-1, 1) to keep f positive")
    if not -1.0 < ini.mu_amplitude < 1.0:
        col.add("[initial] mu_amplitude must lie in (-1, 1) to keep f positive")
    if ini.kind == "doping-maxwellian" and cfg.poisson.doping == "uniform" \
            and cfg.poisson.N0 == 0.0:
        col.add("[initial] doping-maxwellian needs a nonzero doping level")

    if col.problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(col.problems))
    return cfg


def parse_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _fmt(value):
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    return str(value)


def serialize_config(cfg: SimulationConfig) -> str:
    """Canonical text form; stable key order, round-trip safe."""
    out = io.StringIO()
    blocks = (
        ("mesh", cfg.mesh),
        ("band", cfg.band),
        ("scattering", cfg.scattering),
        ("poisson", cfg.poisson),
        ("numerics", cfg.numerics),
        ("run", cfg.run),
        ("initial", cfg.initial),
    )
    for name, block in blocks:
        out.write(f"[{name}]\n")
        for key in _SCHEMA[name]:
            out.write(f"{key} = {_fmt(getattr(block, key))}\n")
        out.write("\n")
    return out.getvalue()


def config_hash(cfg: SimulationConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


PRESET_NAMES = ("periodic-relaxation", "diode-400nm")


def preset_text(name: str) -> str:
    """Raw text of a bundled configuration preset."""
    ref = resources.files("bpdg").joinpath("presets", f"{name}.cfg")
    return ref.read_text(encoding="utf-8")
