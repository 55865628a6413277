"""
Random scenario generator for property sweeps and oracle tests.

Produces small testbeds (up to 6 compute servers, 6 data hosts and 30
jobs) with random capacities, speeds, replica placement, a random
symmetric bandwidth matrix and an optional failure script, together with
a matching plan. Generation is deterministic for a given seed.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from src import config

logger = logging.getLogger(__name__)

MAX_SERVERS = 6
MAX_HOSTS = 6
MAX_JOBS = 30
LFN_DIRECTORY = 'lfn:/sim/data'
GENERATED_HORIZON = 24 * 3600.0

PLAN_TEMPLATE = """parameter INFILE gridfile {pattern};
task nodestart
  copy analysis.conf node:analysis.conf
endtask
task main
  node:execute ./analyse $INFILE $jobname
  copy node:out-$jobname.dat out-$jobname.dat
endtask
"""


class ScenarioGenerator:
    """
    Generates random scenario documents.

    The documents use the same schema as the files under scenarios/, so they
    go through the regular scenario validation when loaded.
    """

    def __init__(self, seed=None, max_servers=MAX_SERVERS, max_hosts=MAX_HOSTS, max_jobs=MAX_JOBS,
                 failure_probability=0.3):
        """
        Initialize the generator.

        Parameters
        ----------
        seed : int, optional
            Random seed. Defaults to config.RANDOM_SEED
        max_servers, max_hosts, max_jobs : int
            Size limits of the generated testbed
        failure_probability : float
            Chance that the scenario carries a failure script
        """
        self.seed = config.RANDOM_SEED if seed is None else seed
        self.rng = np.random.default_rng(self.seed)
        self.max_servers = max_servers
        self.max_hosts = max_hosts
        self.max_jobs = max_jobs
        self.failure_probability = failure_probability

    def generate(self) -> Tuple[Dict, str]:
        """
        Generate one scenario and its plan.

        Returns
        -------
        (dict, str)
            Scenario document and plan-file text
        """
        rng = self.rng
        n_servers = int(rng.integers(1, self.max_servers + 1))
        n_hosts = int(rng.integers(1, self.max_hosts + 1))
        n_jobs = int(rng.integers(1, self.max_jobs + 1))

        servers = self._servers(n_servers)
        hosts = self._hosts(n_hosts, servers)
        catalog = self._catalog(n_jobs, hosts)
        sites = sorted({s['id'] for s in servers} | {h['id'] for h in hosts})

        doc = {
            'name': f"random-{self.seed}",
            'servers': servers,
            'data_hosts': hosts,
            'catalog': catalog,
            'bandwidth_trace': self._trace(sites),
            'symmetric': True,
            'noise': {'sigma': float(round(rng.choice([0.0, 0.1, 0.3]), 2))},
            'failures': self._failures(servers, hosts),
            'estimator': {'alpha': float(round(rng.uniform(0.1, 1.0), 2)),
                          'prior_seconds': float(round(rng.uniform(20, 120), 1))},
            'work': {'seconds': float(round(rng.uniform(20, 120), 1)),
                     'jitter_sigma': float(round(rng.choice([0.0, 0.2]), 2))},
            'event_interval': config.EVENT_INTERVAL_SECONDS,
            'output_bytes': int(rng.integers(0, 2_000_000)),
            'broker_host': servers[0]['id'],
            'horizon': GENERATED_HORIZON,
            'small_file_overhead_seconds': float(round(rng.choice([0.0, 0.5]), 1)),
        }
        plan = PLAN_TEMPLATE.format(pattern=f"{LFN_DIRECTORY}/file*.dat")
        logger.debug("generated scenario %s: %d servers, %d hosts, %d jobs",
                     doc['name'], n_servers, n_hosts, n_jobs)
        return doc, plan

    def _servers(self, n: int) -> List[Dict]:
        servers = []
        for i in range(n):
            cpus = int(self.rng.integers(1, 5))
            servers.append({
                'id': f"s{i}",
                'cpus': cpus,
                'speed': float(round(self.rng.uniform(0.5, 2.0), 2)),
                'max_jobs': cpus * int(self.rng.integers(1, 5)),
            })
        return servers

    def _hosts(self, n: int, servers: List[Dict]) -> List[Dict]:
        hosts = []
        for i in range(n):
            host = {'id': f"h{i}"}
            if i < len(servers) and self.rng.random() < 0.6:
                host['co_located_compute'] = servers[i]['id']
            hosts.append(host)
        return hosts

    def _catalog(self, n_files: int, hosts: List[Dict]) -> List[Dict]:
        entries = []
        for i in range(1, n_files + 1):
            k = int(self.rng.integers(1, min(2, len(hosts)) + 1))
            chosen = sorted(self.rng.choice(len(hosts), size=k, replace=False))
            name = f"file{i:03d}.dat"
            entries.append({
                'lfn': f"{LFN_DIRECTORY}/{name}",
                'size_bytes': int(self.rng.integers(5, 51)) * config.BYTES_PER_MB,
                'replicas': [{'host': hosts[j]['id'], 'path': f"/data/{name}"} for j in chosen],
            })
        return entries

    def _trace(self, sites: List[str]) -> List[Dict]:
        matrix: Dict[str, Dict[str, float]] = {}
        for a_index, a in enumerate(sites):
            for b in sites[a_index + 1:]:
                matrix.setdefault(a, {})[b] = float(round(self.rng.uniform(0.2, 5.0), 2))
        segments = [{'from_time': 0.0, 'matrix': matrix, 'default': 1.0}]
        if self.rng.random() < 0.3:
            scaled = {a: {b: float(round(v * self.rng.uniform(0.3, 1.5), 2)) for b, v in row.items()}
                      for a, row in matrix.items()}
            segments.append({'from_time': float(round(self.rng.uniform(60, 600))),
                             'matrix': scaled, 'default': 1.0})
        return segments

    def _failures(self, servers: List[Dict], hosts: List[Dict]) -> List[Dict]:
        if self.rng.random() >= self.failure_probability:
            return []
        if self.rng.random() < 0.7:
            component, resource = 'compute', servers[int(self.rng.integers(len(servers)))]['id']
        else:
            component, resource = 'data', hosts[int(self.rng.integers(len(hosts)))]['id']
        start = float(round(self.rng.uniform(0, 300)))
        failures = [{'time': start, 'resource': resource, 'component': component, 'action': 'fail'}]
        if self.rng.random() < 0.5:
            failures.append({'time': start + float(round(self.rng.uniform(30, 600))),
                             'resource': resource, 'component': component, 'action': 'recover'})
        return failures


def generate_scenarios(count: int, first_seed: int = 0) -> List[Tuple[int, Dict, str]]:
    """`count` scenarios with consecutive seeds starting at `first_seed`."""
    return [(seed,) + ScenarioGenerator(seed=seed).generate() for seed in range(first_seed, first_seed + count)]
