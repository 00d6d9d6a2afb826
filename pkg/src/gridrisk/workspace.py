"""Workspace: a directory tying together network, config, samples and caches.

Layout:
    network.json    canonical network document
    config.json     simulation config (written with defaults at import)
    samples.jsonl   sample set (fixed-width header + one JSON doc per line)
    manifest.json   hashes and counts describing the files above
    cache/          risk-matrix blobs keyed by (network, model, count)

Every consumer checks hashes before trusting a file; stale caches are
rebuilt, never silently reused.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from . import cascade, risk as riskmod, samples as samplesmod
from .errors import ValidationError
from .failure import SimulationConfig
from .network import Network, from_json, to_json

MANIFEST_VERSION = 1


@dataclass
class Manifest:
    network_hash: str = ""
    config_digest: str = ""
    master_seed: int | None = None
    sample_count: int = 0
    truncated_samples: int = 0

    def as_dict(self) -> dict:
        return {
            "format_version": MANIFEST_VERSION,
            "network_hash": self.network_hash,
            "config_digest": self.config_digest,
            "master_seed": self.master_seed,
            "sample_count": self.sample_count,
            "truncated_samples": self.truncated_samples,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Manifest":
        return cls(
            network_hash=doc.get("network_hash", ""),
            config_digest=doc.get("config_digest", ""),
            master_seed=doc.get("master_seed"),
            sample_count=doc.get("sample_count", 0),
            truncated_samples=doc.get("truncated_samples", 0),
        )


class Workspace:
    def __init__(self, path: str):
        self.path = path
        self.network_path = os.path.join(path, "network.json")
        self.config_path = os.path.join(path, "config.json")
        self.samples_path = os.path.join(path, "samples.jsonl")
        self.manifest_path = os.path.join(path, "manifest.json")
        self.cache_dir = os.path.join(path, "cache")
        self._network: Network | None = None
        self._config: SimulationConfig | None = None

    # ------------------------------------------------------------------- #
    # manifest
    # ------------------------------------------------------------------- #
    def manifest(self) -> Manifest:
        if not os.path.exists(self.manifest_path):
            return Manifest()
        with open(self.manifest_path) as fh:
            return Manifest.from_dict(json.load(fh))

    def _write_manifest(self, manifest: Manifest) -> None:
        os.makedirs(self.path, exist_ok=True)
        with open(self.manifest_path, "w") as fh:
            json.dump(manifest.as_dict(), fh, indent=1)

    # ------------------------------------------------------------------- #
    # network and config
    # ------------------------------------------------------------------- #
    def network(self) -> Network:
        if self._network is None:
            if not os.path.exists(self.network_path):
                raise ValidationError(f"workspace {self.path} has no network.json; run import")
            with open(self.network_path) as fh:
                self._network = from_json(fh.read())
        return self._network

    def config(self) -> SimulationConfig:
        if self._config is None:
            if os.path.exists(self.config_path):
                with open(self.config_path) as fh:
                    self._config = SimulationConfig.from_json(fh.read())
            else:
                self._config = SimulationConfig()
        return self._config

    def set_network(self, network: Network, force: bool = False) -> None:
        """Install a network; refuses to orphan an existing sample set."""
        new_hash = network.digest()
        if os.path.exists(self.samples_path) and not force:
            header = samplesmod.read_header(self.samples_path)
            if header.get("network_hash") != new_hash:
                raise ValidationError(
                    "workspace already holds samples for a different network; "
                    "pass force to discard them"
                )
        os.makedirs(self.path, exist_ok=True)
        with open(self.network_path, "w") as fh:
            fh.write(to_json(network))
        if not os.path.exists(self.config_path):
            config_doc = self.config().to_json()
            with open(self.config_path, "w") as fh:
                fh.write(config_doc)
        if force and os.path.exists(self.samples_path):
            os.remove(self.samples_path)
        self._network = network
        manifest = self.manifest()
        manifest.network_hash = new_hash
        manifest.config_digest = self.config().digest()
        if force:
            manifest.sample_count = 0
            manifest.master_seed = None
            manifest.truncated_samples = 0
        self._write_manifest(manifest)

    # ------------------------------------------------------------------- #
    # samples
    # ------------------------------------------------------------------- #
    def _check_fresh(self, sample_set: samplesmod.SampleSet) -> None:
        if sample_set.network_hash != self.network().digest():
            raise ValidationError(
                "stored samples were generated for a different network; regenerate"
            )
        if sample_set.model_hash != self.config().sampling_digest():
            raise ValidationError(
                "stored samples were generated under a different config; regenerate"
            )

    def load_samples(self) -> samplesmod.SampleSet:
        if not os.path.exists(self.samples_path):
            raise ValidationError(f"workspace {self.path} has no samples; run simulate")
        sample_set = samplesmod.load_samples(self.samples_path)
        self._check_fresh(sample_set)
        return sample_set

    def ensure_samples(
        self, total: int, master_seed: int, workers: int = 1
    ) -> tuple[samplesmod.SampleSet, int]:
        """Grow the stored set to ``total`` samples; returns (set, added)."""
        network = self.network()
        config = self.config()
        if os.path.exists(self.samples_path):
            existing = self.load_samples()
            if existing.master_seed != master_seed:
                raise ValidationError(
                    f"workspace samples use master seed {existing.master_seed}, "
                    f"requested {master_seed}"
                )
            if existing.count >= total:
                return existing, 0
            more = cascade.generate_samples(
                network,
                config,
                n=total - existing.count,
                master_seed=master_seed,
                start_index=existing.count,
                workers=workers,
            )
            extended = samplesmod.append_samples(self.samples_path, existing, more.samples)
            added = more.count
        else:
            extended = cascade.generate_samples(
                network, config, n=total, master_seed=master_seed, workers=workers
            )
            samplesmod.save_samples(self.samples_path, extended)
            added = extended.count
        manifest = self.manifest()
        manifest.network_hash = extended.network_hash
        manifest.config_digest = config.digest()
        manifest.master_seed = master_seed
        manifest.sample_count = extended.count
        manifest.truncated_samples = sum(1 for s in extended.samples if s.truncated)
        self._write_manifest(manifest)
        return extended, added

    # ------------------------------------------------------------------- #
    # risk matrices
    # ------------------------------------------------------------------- #
    def _cache_path(self, network_hash: str, model_hash: str, count: int) -> str:
        return os.path.join(
            self.cache_dir, f"matrices-{network_hash[:8]}-{model_hash[:8]}-{count}.bin"
        )

    def bundle(self) -> riskmod.MatrixBundle:
        """Load the cached matrix blob when fresh, otherwise build and cache."""
        network = self.network()
        config = self.config()
        manifest = self.manifest()
        if manifest.sample_count < 1:
            raise ValidationError(f"workspace {self.path} has no samples; run simulate")
        path = self._cache_path(network.digest(), config.digest(), manifest.sample_count)
        if os.path.exists(path):
            bundle = riskmod.load_blob(path)
            if (
                bundle.network_hash == network.digest()
                and bundle.model_hash == config.digest()
                and bundle.n == manifest.sample_count
            ):
                return bundle
        sample_set = self.load_samples()
        bundle = riskmod.build_bundle(
            sample_set,
            config.model_for(network),
            config.maintenance,
            tuple(sorted(network.maintainable_ids())),
        )
        os.makedirs(self.cache_dir, exist_ok=True)
        riskmod.save_blob(path, bundle)
        return bundle
