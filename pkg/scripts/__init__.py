"""ionsynth utility scripts"""
