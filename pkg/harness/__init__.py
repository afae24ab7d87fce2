"""Experiment harness: configuration, runner, reports, acceptance protocols, CLI."""
