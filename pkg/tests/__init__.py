"""Tests for ionsynth"""
