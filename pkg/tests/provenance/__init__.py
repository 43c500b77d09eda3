"""Tests for the provenance subpackage."""
