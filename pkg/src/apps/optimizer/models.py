import uuid

from django.db import models


class OptimizationRun(models.Model):
    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    scenario_name = models.CharField(max_length=100)

    MODES = [('VARIABLE', 'Variable moment arms'), ('CONSTANT', 'Constant moment arms')]
    mode = models.CharField(max_length=10, choices=MODES)
    wires = models.PositiveSmallIntegerField()
    relays = models.PositiveSmallIntegerField(null=True, blank=True)  # constant designs have none
    gravity = models.BooleanField(default=False)

    # --- Search settings ---
    seed = models.DecimalField(max_digits=20, decimal_places=0)  # unsigned 64-bit
    budget = models.PositiveIntegerField()
    population = models.PositiveIntegerField()
    evaluations = models.PositiveIntegerField(default=0)

    config = models.JSONField()
    elapsed_seconds = models.FloatField(default=0.0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f'{self.scenario_name} seed={self.seed} ({self.evaluations} evaluations)'


class ParetoSolution(models.Model):
    run = models.ForeignKey(OptimizationRun, related_name='front', on_delete=models.CASCADE)
    sample_index = models.PositiveIntegerField()
    e_force = models.FloatField()
    e_velocity = models.FloatField()
    genome = models.JSONField()
    design = models.JSONField()
    is_balanced = models.BooleanField(default=False)

    class Meta:
        ordering = ['e_force', 'e_velocity', 'sample_index']
        unique_together = ('run', 'sample_index')

    def __str__(self):
        return f'#{self.sample_index} ({self.e_force:.4g}, {self.e_velocity:.4g})'
