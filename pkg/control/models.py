"""
Django models for the control app.
NO simulation logic here - only the run registry.
"""
from django.db import models


class ScenarioRun(models.Model):
    """One recorded invocation of run_scenario."""
    COMMAND_CHOICES = [
        ('analyze', 'Analyze'),
        ('simulate', 'Simulate'),
        ('compile-dsd', 'Compile DSD'),
        ('sweep', 'Sweep'),
    ]
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    scenario_name = models.CharField(max_length=200)
    scenario_path = models.CharField(max_length=500)
    command = models.CharField(max_length=20, choices=COMMAND_CHOICES)
    overrides = models.JSONField(default=list, blank=True, help_text="Dotted-path overrides as given")
    status = models.CharField(max_length=20, default='pending', choices=STATUS_CHOICES)
    error_message = models.TextField(blank=True)
    summary = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.command} {self.scenario_name} ({self.status})"


class RunArtifact(models.Model):
    """File written by a recorded run."""
    run = models.ForeignKey(ScenarioRun, on_delete=models.CASCADE, related_name='artifacts')
    kind = models.CharField(max_length=40, help_text="e.g. trajectory, summary, network, gate_report")
    path = models.CharField(max_length=500)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['created_at', 'id']

    def __str__(self):
        return f"{self.kind}: {self.path}"
