"""Composer classification from piano MIDI and audio."""
