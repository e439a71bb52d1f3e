from __future__ import annotations

import os
import tempfile
from pathlib import Path

import pytest

# Every statement the stack executes is also appended to this file, so the
# read-only audit covers endpoint subprocesses too. Must be set before any
# s3ai import executes a query.
_LOG_DIR = tempfile.mkdtemp(prefix="s3ai-sql-log-")
os.environ.setdefault("S3AI_SQL_LOG", str(Path(_LOG_DIR) / "statements.log"))

from s3ai.demo import DemoFixtures, FixtureSpec, build_fixtures  # noqa: E402
from s3ai.mapping import load_mapping  # noqa: E402


@pytest.fixture(scope="session")
def demo_fixtures(tmp_path_factory) -> DemoFixtures:
    dest = tmp_path_factory.mktemp("demo")
    return build_fixtures(dest, FixtureSpec(seed=0))


@pytest.fixture(scope="session")
def os_site(demo_fixtures):
    doc, conn = load_mapping(demo_fixtures.os_mapping)
    return doc, conn


@pytest.fixture(scope="session")
def glpi_site(demo_fixtures):
    doc, conn = load_mapping(demo_fixtures.glpi_mapping)
    return doc, conn


@pytest.fixture(scope="session")
def os_site_aligned(demo_fixtures):
    doc, conn = load_mapping(demo_fixtures.os_mapping_aligned)
    return doc, conn


@pytest.fixture(scope="session")
def glpi_site_aligned(demo_fixtures):
    doc, conn = load_mapping(demo_fixtures.glpi_mapping_aligned)
    return doc, conn


@pytest.fixture(scope="session")
def glpi_site_aligned_2021(demo_fixtures):
    """The glpi site as served in the demo topology (site 2 base IRI)."""
    doc, conn = load_mapping(
        demo_fixtures.glpi_mapping_aligned, base_iri="http://localhost:2021/"
    )
    return doc, conn
