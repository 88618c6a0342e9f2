"""Unit and integration tests"""
