"""Tests for digit-collider."""
