"""Tests for the ac-solve package."""
