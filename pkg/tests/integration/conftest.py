#!/usr/bin/env python3
# Copyright 2025 Canonical Ltd.
# See LICENSE file for licensing details.

import os

import pytest


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add options to the pytest command line.

    This is a pytest hook that is called when the pytest command line is being parsed.

    Args:
      parser: The pytest command line parser.
    """
    parser.addoption(
        "--cli_path", action="store", default="src/cli.py", help="Path to the CLI under test"
    )


def pytest_configure(config: pytest.Config) -> None:
    """Validate the options provided by the user.

    This is a pytest hook that is called after command line options have been parsed.

    Args:
      config: The pytest configuration object.
    """
    cli_path = str(config.getoption("--cli_path"))
    if not cli_path:
        pytest.exit("The --cli_path option is required. Tests aborted.")
    if not os.path.exists(cli_path):
        pytest.exit(f"The path specified for the CLI under test does not exist: {cli_path}")


@pytest.fixture(scope="session")
def cli_path(request: pytest.FixtureRequest) -> str:
    return os.path.abspath(str(request.config.getoption("--cli_path")))
